from eskg.service.app import build_runtime, create_app
from eskg.service.config import ApiConfig
from eskg.service.persistence import ChildStore

__all__ = ["ApiConfig", "ChildStore", "build_runtime", "create_app"]
