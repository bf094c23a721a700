import logging
import os
from typing import Dict, NamedTuple, Optional, Union

from .errors import UnimplementedError

logger = logging.getLogger(__name__)


class ArtifactHeader(NamedTuple):
  command: str
  config_hash: str
  seed: int

  def as_dict(self) -> Dict[str, Union[str, int]]:
    return dict(self._asdict())


class ArtifactRegistrar:
  def register_text(self, name: str, text: str) -> bool:
    raise UnimplementedError('Must implement register_text')

  def register_bytes(self, name: str, data: bytes) -> bool:
    raise UnimplementedError('Must implement register_bytes')

  def location(self, name: str) -> Optional[str]:
    return None


class DirectoryRegistrar(ArtifactRegistrar):
  """
  Writes each artifact to a file of the same name under one directory.

  Attributes:
    directory (str): Target directory, created on first use.
  """

  def __init__(self, directory: str):
    self.directory = directory

  def location(self, name: str) -> str:
    return os.path.join(self.directory, name)

  def write(self, name: str, data: bytes) -> bool:
    path = self.location(name)
    try:
      os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
      with open(path, 'wb') as f:
        f.write(data)
    except OSError as e:
      logger.error('Could not write %s: %s', path, e)
      return False
    logger.info('Wrote %s', path)
    return True

  def register_text(self, name: str, text: str) -> bool:
    return self.write(name, text.encode('utf-8'))

  def register_bytes(self, name: str, data: bytes) -> bool:
    return self.write(name, data)


class MemoryRegistrar(ArtifactRegistrar):
  """Keeps artifacts in a dictionary, for dry runs and tests."""

  def __init__(self):
    self.artifacts: Dict[str, Union[str, bytes]] = {}

  def register_text(self, name: str, text: str) -> bool:
    self.artifacts[name] = text
    return True

  def register_bytes(self, name: str, data: bytes) -> bool:
    self.artifacts[name] = data
    return True
