"""Property testers for strings read through erasure- and corruption-prone oracles."""
from .oracles import Mode, OracleSession
from .properties import get_property
from .testers import Verdict, make_tester

__all__ = ["Mode", "OracleSession", "Verdict", "get_property", "make_tester"]
__version__ = "0.1.0"
