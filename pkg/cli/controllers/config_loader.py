from typing import Optional, Type, TypeVar

from pydantic import BaseModel, ValidationError

from core.exceptions import ConfigError
from core.storage import read_json

Model = TypeVar("Model", bound=BaseModel)


def load_config(path: str, model: Type[Model], seed: Optional[int] = None) -> Model:
    """
    Parse a JSON config file into a pydantic model

    Args:
        path: config file path
        model: schema class to parse into
        seed: command-line seed, replaces the one in the file

    Returns:
        The validated model

    Raises:
        ConfigError: unreadable file, invalid JSON or a schema violation
    """
    raw = read_json(path)
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    if seed is not None:
        raw["seed"] = seed
    return parse_config(raw, model, source=str(path))


def parse_config(raw: dict, model: Type[Model], source: str = "config") -> Model:
    try:
        return model.parse_obj(raw)
    except ValidationError as exc:
        problems = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors())
        raise ConfigError(f"{source}: {problems}")
