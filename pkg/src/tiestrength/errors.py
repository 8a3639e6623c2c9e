"""Exception hierarchy. Every stage raises a subclass of TieStrengthError."""


class TieStrengthError(Exception):
    pass


class ManifestError(TieStrengthError):
    pass


class LoadError(TieStrengthError):
    """Raised by the CSV/JSON loaders; message names row and column."""


class ConfigError(TieStrengthError):
    pass


class ArityError(TieStrengthError):
    pass


class SingularDesignError(TieStrengthError):
    pass


class PerfectFitError(TieStrengthError):
    pass


class MissingFeatureError(TieStrengthError):
    def __init__(self, missing):
        self.missing = list(missing)
        shown = ", ".join(f"({e}, {f})" for e, f in self.missing[:10])
        more = "" if len(self.missing) <= 10 else f" and {len(self.missing) - 10} more"
        super().__init__(f"no feature row for {shown}{more}")
