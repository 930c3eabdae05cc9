import numpy as np
import pytest

from noisytime import (
    DensityMatrix,
    HermitianOperator,
    eigendecompose,
)


@pytest.fixture
def qubit():
    hamiltonian = HermitianOperator(np.diag([0.0, 1.0]))
    return hamiltonian, eigendecompose(hamiltonian), DensityMatrix.pure([1.0, 1.0])


@pytest.fixture
def four_level():
    hamiltonian = HermitianOperator(np.diag([0.0, 0.37, 1.1, 2.03]))
    return hamiltonian, eigendecompose(hamiltonian), DensityMatrix.pure(np.ones(4))


@pytest.fixture
def scenario_yaml(tmp_path):
    """Write a bundled scenario to disk, optionally patched, return its path."""
    import yaml

    from noisytime import bundled_scenario_text

    def _write(name, **overrides):
        data = yaml.safe_load(bundled_scenario_text(name))
        for dotted, value in overrides.items():
            node = data
            keys = dotted.split(".")
            for key in keys[:-1]:
                node = node.setdefault(key, {})
            node[keys[-1]] = value
        path = tmp_path / f"{name}.yaml"
        path.write_text(yaml.safe_dump(data))
        return path

    return _write
