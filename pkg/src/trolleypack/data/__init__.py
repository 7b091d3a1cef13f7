"""Shipped sample data.

``modules_default.csv`` is a nested 6-module trolley layout (every module
pairwise comparable in both dimensions) whose capacities sum to one
trolley.  ``real_parts.csv`` is a fitted-kitchen-style panel list.  Both
are stand-ins with the documented file formats; substitute your own files
for faithful replication of a particular shop floor.
"""

from importlib import resources

from ..core import ModuleSpec, Part
from ..files import read_modules_csv, read_parts_csv


def _read(name: str) -> str:
    return resources.files(__package__).joinpath(name).read_text(encoding="utf-8")


def default_module_set() -> tuple[ModuleSpec, ...]:
    import io

    return read_modules_csv(io.StringIO(_read("modules_default.csv")))


def sample_real_parts() -> tuple[Part, ...]:
    import io

    return read_parts_csv(io.StringIO(_read("real_parts.csv")))
