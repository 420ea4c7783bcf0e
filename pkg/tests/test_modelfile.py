"""Model file parsing and validation."""

import pytest

from singmech.errors import ModelValidationError, UnknownSymbolError
from singmech.modelfile import load_model, load_multitime


def write(tmp_path, text, name="m.model"):
    f = tmp_path / name
    f.write_text(text)
    return f


def test_load_model_minimal(tmp_path):
    f = write(
        tmp_path,
        "[model]\nname = S1\ncoordinates = q1, q2\n"
        "lagrangian = q1_dot*q2 - (q1^2 + q2^2)/2\n",
    )
    model, sampling = load_model(f)
    assert model.name == "S1"
    assert model.n == 2
    assert sampling.seed == 42


def test_load_model_with_parameters_and_sampling(tmp_path):
    f = write(
        tmp_path,
        "[model]\nname = osc\ncoordinates = q1\n"
        "lagrangian = m*q1_dot^2/2 - k*q1^2/2\n"
        "[parameters]\nm = 2.0\nk = 8.0\n"
        "[sampling]\nseed = 7\nsamples = 4\nthreshold = 1e-8\n",
    )
    model, sampling = load_model(f)
    assert model.parameters == {"m": 2.0, "k": 8.0}
    assert sampling.seed == 7
    assert sampling.samples == 4
    assert sampling.threshold == 1e-8


def test_load_model_duplicate_coordinate(tmp_path):
    f = write(
        tmp_path,
        "[model]\nname = bad\ncoordinates = q1, q1\nlagrangian = q1_dot^2/2\n",
    )
    with pytest.raises(ModelValidationError):
        load_model(f)


def test_load_model_undeclared_symbol_named(tmp_path):
    f = write(
        tmp_path,
        "[model]\nname = bad\ncoordinates = q1\nlagrangian = q3_dot^2/2\n",
    )
    with pytest.raises(UnknownSymbolError) as err:
        load_model(f)
    assert "q3_dot" in str(err.value)


def test_load_model_missing_section(tmp_path):
    f = write(tmp_path, "[wrong]\nname = x\n")
    with pytest.raises(ModelValidationError):
        load_model(f)


def test_load_model_missing_key(tmp_path):
    f = write(tmp_path, "[model]\nname = x\ncoordinates = q1\n")
    with pytest.raises(ModelValidationError):
        load_model(f)


def test_load_model_bad_parameter_value(tmp_path):
    f = write(
        tmp_path,
        "[model]\nname = bad\ncoordinates = q1\nlagrangian = q1_dot^2/2\n"
        "[parameters]\nk = soft\n",
    )
    with pytest.raises(ModelValidationError):
        load_model(f)


def test_load_model_missing_file(tmp_path):
    with pytest.raises(ModelValidationError):
        load_model(tmp_path / "nope.model")


def test_load_multitime(tmp_path):
    f = write(
        tmp_path,
        "[multitime]\nname = drift\ncanonical = q\ntimes = tau0, tau1\n"
        "h0 = p_q^2/2\nh1 = p_q\n",
    )
    mts = load_multitime(f)
    assert mts.n_times == 2
    assert [s.name for s in mts.state_symbols] == ["q", "p_q"]
    assert [str(h) for h in mts.hamiltonians] == ["1/2*p_q^2", "p_q"]


def test_load_multitime_missing_hamiltonian(tmp_path):
    f = write(
        tmp_path,
        "[multitime]\nname = bad\ncanonical = q\ntimes = tau0, tau1\nh0 = p_q\n",
    )
    with pytest.raises(ModelValidationError):
        load_multitime(f)


def test_bundled_fixture_files_load():
    from importlib.resources import files

    root = files("singmech") / "fixtures"
    for name in ("R", "S1", "S2", "G1", "G2"):
        model, _ = load_model(str(root / f"{name}.model"))
        assert model.name == name
    for name in ("mt-drift", "mt-shear"):
        mts = load_multitime(str(root / f"{name}.model"))
        assert mts.n_times == 2


def test_bundled_files_match_programmatic_models():
    from importlib.resources import files

    from singmech.expr import Add, Neg, is_zero
    from singmech.models import MODEL_SOURCES, bundled_model

    root = files("singmech") / "fixtures"
    for name in MODEL_SOURCES:
        from_file, _ = load_model(str(root / f"{name}.model"))
        programmatic = bundled_model(name)
        assert [c.name for c in from_file.coordinates] == [
            c.name for c in programmatic.coordinates
        ]
        assert is_zero(Add((from_file.lagrangian, Neg(programmatic.lagrangian))))
