"""INI-style experiment configuration and analytic potential recipes."""
import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import PreconditionError
from .forward import BoundarySamples, PotentialGrid, gaussian_data
from .green import MediumSpec


class ConfigError(ValueError):
    """Unreadable or malformed configuration (CLI exit status 2)."""


def parse_complex(text):
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ConfigError(f"not a complex number: {text!r}") from None


def parse_floats(text):
    try:
        return [float(t) for t in str(text).replace(";", ",").split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"not a list of numbers: {text!r}") from None


def parse_points(text, d):
    """'x1,x2; x1,x2' -> (n, d) array."""
    rows = [r for r in str(text).split(";") if r.strip()]
    pts = [parse_floats(r) for r in rows]
    if not pts or any(len(p) != d for p in pts):
        raise ConfigError(f"expected points with {d} coordinates separated by ';', got {text!r}")
    return np.array(pts)


# ---------------------------------------------------------------------------
# potential recipes; each returns q(X) for X of shape (n, d)
def bump_recipe(center, radius=1.0, height=1.0, k=1.0):
    """q = k^2 + height * exp(1 - 1/(1 - r^2)) inside the ball, k^2 outside."""
    c = np.asarray(center, float)

    def q(X):
        r2 = np.sum((X - c) ** 2, axis=1) / radius ** 2
        out = np.zeros(len(X), complex)
        inside = r2 < 1
        out[inside] = height * np.exp(1 - 1 / (1 - r2[inside]))
        return k * k + out
    return q


def annulus_recipe(center, inner, outer, value, k=1.0):
    c = np.asarray(center, float)

    def q(X):
        r = np.sqrt(np.sum((X - c) ** 2, axis=1))
        return k * k + np.where((r >= inner) & (r < outer), value, 0.0)
    return q


def piecewise_recipe(boxes, values, k=1.0):
    """Constant ``values[i]`` on the axis-aligned box ``boxes[i] = (lo, hi)``."""
    def q(X):
        out = np.full(len(X), k * k, complex)
        for (lo, hi), v in zip(boxes, values):
            inside = np.all((X >= lo) & (X < hi), axis=1)
            out[inside] = k * k + v
        return out
    return q


@dataclass
class ExperimentConfig:
    medium: MediumSpec
    potential: dict = field(default_factory=dict)
    boundary: dict = field(default_factory=dict)
    run: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    source: str = "<defaults>"

    # -- typed accessors ---------------------------------------------------
    def _get(self, section, key, default, conv):
        table = getattr(self, section)
        if key not in table:
            if default is KeyError:
                raise ConfigError(f"{self.source}: [{section}] needs '{key}'")
            return default
        try:
            return conv(table[key])
        except ConfigError as exc:
            raise ConfigError(f"{self.source}: [{section}] {key}: {exc}") from None
        except (TypeError, ValueError):
            raise ConfigError(f"{self.source}: [{section}] {key} = {table[key]!r} is malformed") from None

    def get_float(self, section, key, default=KeyError):
        return self._get(section, key, default, float)

    def get_int(self, section, key, default=KeyError):
        return self._get(section, key, default, int)

    def get_complex(self, section, key, default=KeyError):
        return self._get(section, key, default, parse_complex)

    def get_floats(self, section, key, default=KeyError):
        return self._get(section, key, default, parse_floats)

    def get_str(self, section, key, default=KeyError):
        return self._get(section, key, default, str)

    def get_points(self, section, key, default=KeyError):
        return self._get(section, key, default, lambda t: parse_points(t, self.medium.d))

    # -- builders --------------------------------------------------------------
    def build_potential(self):
        recipe = self.get_str("potential", "recipe", "none")
        if recipe == "none":
            return None
        d, k = self.medium.d, self.medium.k
        lo = self.get_floats("potential", "lo")
        hi = self.get_floats("potential", "hi")
        n = [int(v) for v in self.get_floats("potential", "n")]
        if not (len(lo) == len(hi) == len(n) == d):
            raise ConfigError(f"{self.source}: [potential] lo, hi, n need {d} entries each")
        if recipe == "bump":
            func = bump_recipe(self.get_floats("potential", "center"),
                               self.get_float("potential", "radius", 1.0),
                               self.get_complex("potential", "height", 1.0), k)
        elif recipe == "annulus":
            func = annulus_recipe(self.get_floats("potential", "center"),
                                  self.get_float("potential", "inner"),
                                  self.get_float("potential", "outer"),
                                  self.get_complex("potential", "value"), k)
        elif recipe == "piecewise":
            flat = self.get_floats("potential", "boxes")
            vals = [parse_complex(v) for v in self.get_str("potential", "values").split(",")]
            if len(flat) != 2 * d * len(vals):
                raise ConfigError(f"{self.source}: [potential] boxes needs 2*{d} numbers per value")
            boxes = [(np.array(flat[i * 2 * d: i * 2 * d + d]), np.array(flat[i * 2 * d + d: (i + 1) * 2 * d]))
                     for i in range(len(vals))]
            func = piecewise_recipe(boxes, vals, k)
        else:
            raise ConfigError(f"{self.source}: unknown potential recipe {recipe!r}")
        try:
            return PotentialGrid.from_function(func, lo, hi, n)
        except PreconditionError as exc:
            raise ConfigError(f"{self.source}: [potential] {exc}") from None

    def build_boundary(self):
        d = self.medium.d
        half = self.get_float("boundary", "half_width", 6.0)
        spacing = self.get_float("boundary", "spacing", 0.1)
        delta = self.get_float("boundary", "delta", 1.0)
        samples = BoundarySamples.uniform(d, half, spacing, delta_exponent=delta)
        recipe = self.get_str("boundary", "data", "gaussian")
        if recipe != "gaussian":
            raise ConfigError(f"{self.source}: unknown boundary data recipe {recipe!r}")
        return gaussian_data(samples, self.get_floats("boundary", "center", [0.0] * (d - 1)),
                             self.get_float("boundary", "width", 0.5),
                             self.get_float("boundary", "amplitude", 1.0))


def load_config(path=None, dim=None):
    """Read an INI file; ``dim`` overrides [medium] d."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    source = "<defaults>"
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {p}: {exc}") from None
        if not text.strip():
            raise ConfigError(f"config file is empty: {p}")
        try:
            parser.read_string(text, source=str(p))
        except configparser.Error as exc:
            raise ConfigError(f"{p}: {exc}") from None
        source = str(p)
    sections = {s: dict(parser[s]) for s in parser.sections()}
    med = sections.get("medium", {})
    try:
        d = int(dim if dim is not None else med.get("d", 2))
        k = float(med.get("k", 1.0))
        theta = parse_complex(med.get("theta", "0"))
    except ValueError as exc:
        raise ConfigError(f"{source}: [medium] {exc}") from None
    try:
        medium = MediumSpec(d, k, theta)
    except PreconditionError as exc:
        raise ConfigError(f"{source}: [medium] {exc}") from None
    unknown = set(sections) - {"medium", "potential", "boundary", "run", "output"}
    if unknown:
        raise ConfigError(f"{source}: unknown section(s) {sorted(unknown)}")
    return ExperimentConfig(medium, sections.get("potential", {}), sections.get("boundary", {}),
                            sections.get("run", {}), sections.get("output", {}), source)
