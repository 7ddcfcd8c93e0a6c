class BridgeError(Exception):
    """Base for all bridge failures."""


class ManifestError(BridgeError):
    """Manifest file missing, malformed, or referencing bad values."""


class DecodeError(BridgeError):
    """A clip's video could not be opened or decoded."""

    def __init__(self, clip: str, reason: str):
        self.clip = clip
        self.reason = reason
        super().__init__(f"{clip}: {reason}")
