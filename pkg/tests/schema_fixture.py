from pathlib import Path

import pytest
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker
from sqlalchemy_utils import create_database, database_exists, drop_database

from netmark.schema import NetmarkDBBase


@pytest.fixture(scope="function")
def nm_session(tmp_path):
    """Returns a netmark run registry session for testing."""
    engine = create_engine(sqlite_url(tmp_path), echo=False)
    if not database_exists(engine.url):
        create_database(engine.url)

    NetmarkDBBase.metadata.create_all(engine)

    session_maker = sessionmaker(bind=engine)
    sess = session_maker()

    try:
        yield sess
    finally:
        sess.close()
        # Dropping the database for SQLite deletes the SQLite file.
        drop_database(engine.url)


def sqlite_url(tmp_path: Path):
    """Returns an SQLite URL configured to a temporary path."""
    p = tmp_path / "netmark.db"
    return 'sqlite:///{}'.format(p)
