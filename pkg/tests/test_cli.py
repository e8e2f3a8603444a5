"""
Tests for the command-line interface.
"""

import json

import pytest
from click.testing import CliRunner

from freemaps.cli import cli

pytestmark = pytest.mark.integration

COMMANDS = [
    "eval",
    "member",
    "deriv",
    "check",
    "probe-proper",
    "probe-injective",
    "mobius",
    "ellipse",
]
ONE = {"rows": 1, "cols": 1, "re": [[1.0]], "im": [[0.0]]}

MOBIUS = "exp(i*0.7)*x1*inv(1+x1-exp(i*0.7)*x1)"


def scalar_tuple(path, *values):
    """Write a tuple of 1x1 matrices to ``path``."""
    data = [
        {"rows": 1, "cols": 1, "re": [[complex(v).real]], "im": [[complex(v).imag]]}
        for v in values
    ]
    path.write_text(json.dumps(data))
    return str(path)


class TestCLI:
    """Tests for the freemaps command group."""

    def setup_method(self):
        """Setup before each test."""
        self.runner = CliRunner()

    def invoke(self, *args, **kwargs):
        return self.runner.invoke(cli, [str(a) for a in args], **kwargs)

    def test_version(self):
        """Test the version option."""
        result = self.invoke("--version")
        assert result.exit_code == 0
        assert "0.3.0" in result.output

    def test_help(self):
        """Test that every subcommand is listed."""
        result = self.invoke("--help")
        assert result.exit_code == 0
        for name in COMMANDS:
            assert name in result.output


class TestEval:
    """Tests for freemaps eval."""

    def setup_method(self):
        self.runner = CliRunner()

    def test_square_of_shift(self, fixtures_dir, tmp_path):
        """Test that x1*x1 vanishes at the 2x2 shift."""
        out = tmp_path / "out.json"
        shift = str(fixtures_dir / "shift2.json")
        result = self.runner.invoke(
            cli, ["eval", "x1*x1", "--tuple", shift, "--out", str(out)]
        )
        assert result.exit_code == 0
        data = json.loads(out.read_text())
        assert data[0]["re"] == [[0.0, 0.0], [0.0, 0.0]]
        assert data[0]["im"] == [[0.0, 0.0], [0.0, 0.0]]

    def test_json_output(self, fixtures_dir):
        """Test that --json prints the tuple."""
        result = self.runner.invoke(
            cli, ["eval", MOBIUS, "--tuple", str(fixtures_dir / "zero.json"), "--json"]
        )
        assert result.exit_code == 0
        assert '"rows": 1' in result.output

    def test_several_components(self, fixtures_dir, tmp_path):
        """Test a two-component map on a 2-tuple."""
        out = tmp_path / "out.json"
        pair = str(fixtures_dir / "pair_half.json")
        result = self.runner.invoke(
            cli,
            ["eval", "x1 + x2", "x1*x2", "--tuple", pair, "--out", str(out)],
        )
        assert result.exit_code == 0
        data = json.loads(out.read_text())
        assert data[0]["re"] == [[0.2]]
        assert data[0]["im"] == [[0.1]]
        assert data[1]["im"][0][0] == pytest.approx(0.02)

    def test_singular_inverse_exits_3(self, fixtures_dir):
        """Test that inv(x1) at 0 is an evaluation error."""
        zero = str(fixtures_dir / "zero.json")
        result = self.runner.invoke(cli, ["eval", "inv(x1)", "--tuple", zero])
        assert result.exit_code == 3

    @pytest.mark.parametrize("expr", ["x1 +", "x1 $ 2", "x3"])
    def test_parse_errors_exit_2(self, fixtures_dir, expr):
        """Test that bad expressions and unknown variables exit 2."""
        zero = str(fixtures_dir / "zero.json")
        result = self.runner.invoke(cli, ["eval", expr, "--tuple", zero])
        assert result.exit_code == 2

    @pytest.mark.parametrize("name", ["missing.json", "broken.json", "bad_shape.json"])
    def test_file_errors_exit_4(self, fixtures_dir, name):
        """Test that unreadable or malformed files exit 4."""
        path = str(fixtures_dir / name)
        result = self.runner.invoke(cli, ["eval", "x1", "--tuple", path])
        assert result.exit_code == 4


class TestMember:
    """Tests for freemaps member."""

    def setup_method(self):
        self.runner = CliRunner()

    def run_member(self, domain, tuple_file, out):
        args = ["member", "--domain", domain, "--tuple", tuple_file, "--out", out]
        return self.runner.invoke(cli, [str(a) for a in args])

    def test_origin_inside(self, fixtures_dir, tmp_path):
        """Test that 0 is inside the disk domain."""
        out = tmp_path / "out.json"
        result = self.run_member(
            fixtures_dir / "disk_pencil.json", fixtures_dir / "zero.json", out
        )
        assert result.exit_code == 0
        data = json.loads(out.read_text())
        assert data["membership"] == "inside"
        assert data["verdict"] == "pass"
        assert data["gap"] == pytest.approx(1.0)
        assert all(f.startswith("sha256:") for f in data["inputs"])

    def test_boundary(self, fixtures_dir, tmp_path):
        """Test that 1 + sqrt(2) is on the boundary and still exits 0."""
        out = tmp_path / "out.json"
        result = self.run_member(
            fixtures_dir / "disk_pencil.json", fixtures_dir / "disk_boundary.json", out
        )
        assert result.exit_code == 0
        assert json.loads(out.read_text())["membership"] == "boundary"

    def test_outside(self, fixtures_dir, tmp_path):
        """Test a point outside the disk domain."""
        out = tmp_path / "out.json"
        point = scalar_tuple(tmp_path / "x.json", 3.0)
        result = self.run_member(fixtures_dir / "disk_pencil.json", point, out)
        assert result.exit_code == 0
        assert json.loads(out.read_text())["membership"] == "outside"

    def test_poly_domain(self, fixtures_dir, tmp_path):
        """Test membership in a polynomial domain."""
        out = tmp_path / "out.json"
        result = self.run_member(
            fixtures_dir / "poly_domain.json", fixtures_dir / "zero.json", out
        )
        assert result.exit_code == 0
        assert json.loads(out.read_text())["membership"] == "inside"

    def test_arity_mismatch_exits_3(self, fixtures_dir, tmp_path):
        """Test that a 1-tuple against a 2-variable domain fails to evaluate."""
        result = self.run_member(
            fixtures_dir / "eps_domain.json",
            fixtures_dir / "zero.json",
            tmp_path / "o.json",
        )
        assert result.exit_code == 3

    def test_byte_identical_reports(self, fixtures_dir, tmp_path):
        """Test that two identical runs write identical files."""
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        domain = fixtures_dir / "eps_domain.json"
        pair = fixtures_dir / "pair_half.json"
        self.run_member(domain, pair, first)
        self.run_member(domain, pair, second)
        assert first.read_bytes() == second.read_bytes()

    def test_text_output(self, fixtures_dir):
        """Test the table output."""
        domain = str(fixtures_dir / "eps_domain.json")
        pair = str(fixtures_dir / "pair_half.json")
        result = self.runner.invoke(
            cli, ["member", "--domain", domain, "--tuple", pair]
        )
        assert result.exit_code == 0
        assert "inside" in result.output


class TestDeriv:
    """Tests for freemaps deriv."""

    def setup_method(self):
        self.runner = CliRunner()

    def test_direction(self, fixtures_dir, tmp_path):
        """Test f'(X)[H] for a linear map."""
        out = tmp_path / "out.json"
        shift = str(fixtures_dir / "shift2.json")
        args = ["deriv", "3*x1", "--tuple", shift, "--direction", shift]
        result = self.runner.invoke(cli, args + ["--out", str(out)])
        assert result.exit_code == 0
        re = json.loads(out.read_text())[0]["re"]
        assert re[0] == pytest.approx([0.0, 3.0])
        assert re[1] == pytest.approx([0.0, 0.0])

    def test_rank_loss_exits_0(self, fixtures_dir, tmp_path):
        """Test that x^2 at 0 reports a singular derivative without failing."""
        out = tmp_path / "out.json"
        zero = str(fixtures_dir / "zero.json")
        result = self.runner.invoke(
            cli, ["deriv", "x1*x1", "--tuple", zero, "--out", str(out)]
        )
        assert result.exit_code == 0
        data = json.loads(out.read_text())
        assert data["full_rank"] is False
        assert data["samples"][0]["singular_values"] == [0.0]
        assert data["samples"][0]["eigenvalues"] == [[0.0, 0.0]]

    def test_direction_shape_mismatch(self, fixtures_dir):
        """Test that a direction of the wrong size exits 3."""
        result = self.runner.invoke(
            cli,
            [
                "deriv",
                "x1",
                "--tuple",
                str(fixtures_dir / "zero.json"),
                "--direction",
                str(fixtures_dir / "shift2.json"),
            ],
        )
        assert result.exit_code == 3


class TestCheck:
    """Tests for freemaps check."""

    def setup_method(self):
        self.runner = CliRunner()

    def test_sums(self, tmp_path):
        """Test that the direct-sum suite passes."""
        out = tmp_path / "out.json"
        result = self.runner.invoke(
            cli, ["check", "sums", "--trials", "5", "--seed", "3", "--out", str(out)]
        )
        assert result.exit_code == 0
        data = json.loads(out.read_text())
        assert data["op"] == "check.sums"
        assert data["trials"] == 5
        assert data["seed"] == 3

    def test_impossible_tolerance_exits_1(self):
        """Test that a violated tolerance exits 1."""
        result = self.runner.invoke(
            cli, ["check", "derivative", "--trials", "3", "--tol", "1e-30"]
        )
        assert result.exit_code == 1

    def test_unknown_suite(self):
        """Test that an unknown suite is a usage error."""
        result = self.runner.invoke(cli, ["check", "nonsense"])
        assert result.exit_code == 2

    def test_trials_from_environment(self, tmp_path):
        """Test that FREEMAPS_TRIALS sets the default number of trials."""
        out = tmp_path / "out.json"
        result = self.runner.invoke(
            cli, ["check", "sums", "--out", str(out)], env={"FREEMAPS_TRIALS": "4"}
        )
        assert result.exit_code == 0
        assert json.loads(out.read_text())["trials"] == 4

    def test_env_file(self, tmp_path):
        """Test that --env-file supplies the default seed."""
        env_file = tmp_path / "settings.env"
        env_file.write_text("FREEMAPS_SEED=9\n")
        out = tmp_path / "out.json"
        result = self.runner.invoke(
            cli,
            [
                "--env-file",
                str(env_file),
                "check",
                "sums",
                "--trials",
                "2",
                "--out",
                str(out),
            ],
            env={"FREEMAPS_SEED": None},
        )
        assert result.exit_code == 0
        assert json.loads(out.read_text())["seed"] == 9

    @pytest.mark.parametrize(
        "name, value",
        [
            ("FREEMAPS_SEED", "abc"),
            ("FREEMAPS_TRIALS", "0"),
            ("FREEMAPS_LOG_LEVEL", "loud"),
        ],
    )
    def test_invalid_environment_is_usage_error(self, name, value):
        """Test that a malformed setting exits 2 and names the variable."""
        result = self.runner.invoke(cli, ["check", "sums"], env={name: value})
        assert result.exit_code == 2
        assert name in result.output


class TestProbes:
    """Tests for freemaps probe-proper and probe-injective."""

    def setup_method(self):
        self.runner = CliRunner()

    def test_identity_is_proper(self, fixtures_dir, tmp_path):
        """Test the properness probe on the identity of the disk domain."""
        out = tmp_path / "out.json"
        disk = str(fixtures_dir / "disk_pencil.json")
        result = self.runner.invoke(
            cli,
            ["probe-proper", "x1", "--domain", disk, "--rays", "3", "--out", str(out)],
        )
        assert result.exit_code == 0
        data = json.loads(out.read_text())
        assert len(data["rays"]) == 3
        assert data["max_terminal_gap"] <= 1e-6

    def test_contraction_exits_1(self, fixtures_dir):
        """Test that x/2 fails the properness probe."""
        disk = str(fixtures_dir / "disk_pencil.json")
        result = self.runner.invoke(
            cli, ["probe-proper", "0.5*x1", "--domain", disk, "--rays", "2"]
        )
        assert result.exit_code == 1

    def test_injectivity_counterexample(self, tmp_path):
        """Test that x^2 on the unit ball gives a counterexample candidate."""
        domain = tmp_path / "ball.json"
        domain.write_text(json.dumps({"kind": "eps", "eps": 1.0}))
        gamma = tmp_path / "gamma.json"
        gamma.write_text(json.dumps(ONE))
        out = tmp_path / "out.json"
        result = self.runner.invoke(
            cli,
            [
                "probe-injective",
                "x1*x1",
                "--domain",
                str(domain),
                "--tuple",
                scalar_tuple(tmp_path / "x.json", 0.5),
                "--other",
                scalar_tuple(tmp_path / "y.json", -0.5),
                "--gamma",
                str(gamma),
                "--out",
                str(out),
            ],
        )
        assert result.exit_code == 1
        assert json.loads(out.read_text())["verdict"] == "counterexample-candidate"

    def test_injectivity_inconclusive_exits_0(self, fixtures_dir, tmp_path):
        """Test that an unmet hypothesis is not a violation."""
        gamma = tmp_path / "gamma.json"
        gamma.write_text(json.dumps(ONE))
        result = self.runner.invoke(
            cli,
            [
                "probe-injective",
                "x1",
                "--domain",
                str(fixtures_dir / "disk_pencil.json"),
                "--tuple",
                scalar_tuple(tmp_path / "x.json", 0.1),
                "--other",
                scalar_tuple(tmp_path / "y.json", 0.2),
                "--gamma",
                str(gamma),
            ],
        )
        assert result.exit_code == 0
        assert "inconclusive" in result.output


class TestMobius:
    """Tests for freemaps mobius."""

    def setup_method(self):
        self.runner = CliRunner()

    def test_report(self, tmp_path):
        """Test that f_0.7 passes every check."""
        out = tmp_path / "out.json"
        result = self.runner.invoke(
            cli, ["mobius", "--theta", "0.7", "--trials", "10", "--out", str(out)]
        )
        assert result.exit_code == 0
        data = json.loads(out.read_text())
        assert data["verdict"] == "pass"
        assert set(data["checks"]) == {
            "membership",
            "inverse",
            "characterizations",
            "properness",
            "derivative",
        }

    def test_theta_required(self):
        """Test that --theta is required."""
        result = self.runner.invoke(cli, ["mobius"])
        assert result.exit_code == 2


@pytest.mark.slow
class TestEllipse:
    """Tests for freemaps ellipse."""

    def setup_method(self):
        self.runner = CliRunner()

    def test_witness(self, tmp_path):
        """Test the default orientation."""
        out = tmp_path / "out.json"
        result = self.runner.invoke(cli, ["ellipse", "--out", str(out)])
        assert result.exit_code == 0
        data = json.loads(out.read_text())
        assert data["r0"] == pytest.approx(1.00033, abs=2e-4)
        assert data["min_eig"] > 0

    def test_real_orientation(self, tmp_path):
        """Test the horizontal ellipse."""
        out = tmp_path / "out.json"
        result = self.runner.invoke(
            cli, ["ellipse", "--orientation", "real", "--out", str(out)]
        )
        assert result.exit_code == 0
        ratio = json.loads(out.read_text())["c3_over_c1"]
        assert ratio == pytest.approx(-0.30572, abs=1e-4)
