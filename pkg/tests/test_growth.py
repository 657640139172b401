"""Growth-class descriptors, algebra, classification, and the expression parser."""

import numpy as np
import pytest

from gaussqmc import (
    GrowthClass,
    ValidationError,
    add_classes,
    boundary_exponent,
    classify,
    compose_classes,
    make_fast_growth_integrand,
    mul_classes,
    parse_class_expr,
    predicted_rate,
    scale_class,
    t_reciprocal_class,
)
from gaussqmc.dist import t_pdf
from gaussqmc.oracle import (
    QuadratureSpec,
    cosh_product_integrand,
    linear_integrand,
    quad_expectation,
    quadratic_integrand,
)
from gaussqmc.dist import normal_spec

GRID = np.linspace(0.0, 8.0, 801)


def Gp(M, B, k):
    return GrowthClass("polynomial", M, B, k)


def Ge(M, B, k):
    return GrowthClass("exponential", M, B, k)


class TestTestFunction:
    def test_normalizer(self):
        h = make_fast_growth_integrand(0.2, 5)
        c = 0.6**2.5
        assert c == pytest.approx(0.278855, abs=1e-6)
        assert h.fn(np.zeros((1, 5)))[0] == pytest.approx(c, rel=1e-14)
        g = h.growth_class
        assert (g.kind, g.k, g.M) == ("exponential", 2.0, 0.2)
        assert g.B == pytest.approx(c, rel=1e-14)

    def test_known_mean_declared(self):
        for M, d in [(0.1, 1), (0.3, 7), (0.49, 2)]:
            assert make_fast_growth_integrand(M, d).known_mean == 1.0

    def test_divergent_rate_rejected(self):
        with pytest.raises(ValidationError):
            make_fast_growth_integrand(0.5, 3)

    def test_tiny_rate_limit(self):
        h = make_fast_growth_integrand(1e-9, 1)
        val = quad_expectation(h.fn, normal_spec(1), QuadratureSpec())
        assert val == pytest.approx(1.0, abs=1e-6)

    def test_gradient_matches_fd(self):
        h = make_fast_growth_integrand(0.2, 2)
        x = np.array([[0.7, -1.2]])
        eps = 1e-6
        for j in range(2):
            shift = np.zeros((1, 2))
            shift[0, j] = eps
            fd = (h.fn(x + shift) - h.fn(x - shift)) / (2 * eps)
            assert h.gradient(x)[0, j] == pytest.approx(fd[0], rel=1e-8)


class TestAlgebraDescriptors:
    def test_scale_examples(self):
        assert scale_class(2, Gp(1, 1, 2)) == Gp(2, 2, 2)
        g = Ge(0.1, 1, 2)
        assert scale_class(1, g) == g
        assert scale_class(-3, Ge(0.1, 1, 2)) == Ge(0.1, 3, 2)
        with pytest.raises(ValidationError):
            scale_class(0, g)

    def test_add_examples(self):
        assert add_classes(Ge(0.1, 1, 2), Ge(0.3, 2, 2)) == Ge(0.3, 3, 2)
        g = Ge(0.2, 1.5, 2)
        assert add_classes(g, g) == Ge(0.2, 3.0, 2)
        out = add_classes(Gp(1, 1, 3), Gp(2, 1, 1))
        assert out.kind == "polynomial" and out.k == 3 and out.M == 3 and out.B == 2

    def test_mul_examples(self):
        out = mul_classes(Ge(0.1, 1, 2), Ge(0.2, 1, 2))
        assert out.kind == "exponential" and out.M == pytest.approx(0.3) and out.k == 2
        out = mul_classes(Gp(1, 2, 1), Gp(1, 3, 2))
        assert out.kind == "polynomial" and out.k == 3
        out = mul_classes(Ge(0.2, 1, 2), Gp(1, 1, 4), slack=1e-3)
        assert out.kind == "exponential" and out.k == 2
        assert out.M == pytest.approx(0.2 + 1e-3)

    def test_compose_examples(self):
        out = compose_classes(Gp(1, 1, 2), Gp(2, 1, 3))
        assert out.kind == "polynomial" and out.k == 6
        out = compose_classes(Gp(1, 1, 4), Gp(1, 1, 1))
        assert out.k == 4
        out = compose_classes(Gp(2, 1, 3), Ge(0.1, 1, 2))
        assert out.kind == "exponential" and out.k == 2
        out = compose_classes(Ge(0.5, 1, 1), Gp(2, 1, 2))
        assert out.kind == "exponential" and out.k == 2
        with pytest.raises(ValidationError):
            compose_classes(Ge(0.1, 1, 1), Ge(0.1, 1, 1))

    def test_commutativity_same_kind(self):
        a, b = Ge(0.1, 1, 2), Ge(0.3, 2, 2)
        assert add_classes(a, b) == add_classes(b, a)
        assert mul_classes(a, b) == mul_classes(b, a)
        a, b = Gp(1, 2, 2), Gp(3, 1, 2)
        assert add_classes(a, b) == add_classes(b, a)

    def test_scale_keeps_classification(self):
        for g in (Ge(0.2, 1, 2), Gp(5, 5, 10), Ge(0.1, 1, 1)):
            for c in (0.5, 2.0, -7.0):
                assert classify(scale_class(c, g)) == classify(g)


class TestAlgebraSoundness:
    """Numeric domination: combined descriptors bound combined functions."""

    def cases(self):
        # concrete functions paired with their declared classes (d = 1)
        lin = (lambda r: r, Gp(1, 1, 1))
        quad = (lambda r: r * r, Gp(1, 1, 2))
        cosh1 = (np.cosh, Ge(1, 1, 1))
        fast = (lambda r: 0.9 * np.exp(0.2 * r * r), Ge(0.2, 0.9, 2))
        return [lin, quad, cosh1, fast]

    def test_add_dominates(self):
        for f, gf in self.cases():
            for h, gh in self.cases():
                combined = add_classes(gf, gh)
                assert np.all(np.abs(f(GRID) + h(GRID)) <= combined.bound(GRID) * (1 + 1e-12))

    def test_mul_dominates(self):
        for f, gf in self.cases():
            for h, gh in self.cases():
                combined = mul_classes(gf, gh)
                assert np.all(np.abs(f(GRID) * h(GRID)) <= combined.bound(GRID) * (1 + 1e-12))

    def test_compose_dominates(self):
        outer = (lambda r: r * r, Gp(1, 1, 2))
        inner = (lambda r: 0.5 * r + 1, Gp(0.5, 1, 1))
        combined = compose_classes(outer[1], inner[1])
        assert np.all(outer[0](inner[0](GRID)) <= combined.bound(GRID) * (1 + 1e-12))

    def test_shipped_integrands_respect_bounds(self):
        for integrand in (
            linear_integrand(2),
            quadratic_integrand(2),
            cosh_product_integrand(2),
            make_fast_growth_integrand(0.2, 2),
        ):
            g = integrand.growth_class
            rng = np.random.default_rng(5)
            for r in GRID[1:: 40]:
                direction = rng.normal(size=(8, 2))
                direction /= np.linalg.norm(direction, axis=1, keepdims=True)
                vals = np.abs(integrand.fn(r * direction))
                assert np.all(vals <= g.bound(r) * (1 + 1e-12))

    def test_t_reciprocal_class_dominates(self):
        for nu in (3.0, 5.0):
            g = t_reciprocal_class(nu)
            assert g.kind == "polynomial" and g.k == nu + 1
            recip = 1.0 / np.asarray(t_pdf(GRID, nu))
            assert np.all(recip <= g.bound(GRID) * (1 + 1e-12))


class TestClassification:
    def test_classify_examples(self):
        assert classify(Ge(0.3, 1, 2)) == "fast"
        assert classify(Gp(5, 5, 10)) == "qmc-friendly"
        assert classify(Ge(0.5, 1, 2)) == "divergent-risk"
        assert classify(Ge(0.1, 1, 3)) == "divergent-risk"
        assert classify(Ge(2.0, 1, 1.5)) == "qmc-friendly"

    def test_boundary_exponent_examples(self):
        assert boundary_exponent(Ge(0.2, 1, 2)) == pytest.approx(0.4)
        assert boundary_exponent(Gp(1, 1, 3)) == 0.0
        assert boundary_exponent(Ge(0.1, 1, 1)) == 0.0
        with pytest.raises(ValidationError):
            boundary_exponent(Ge(0.6, 1, 2))

    def test_predicted_rate_examples(self):
        assert predicted_rate(Ge(0.2, 1, 2), "rqmc") == pytest.approx(-0.6)
        assert predicted_rate(Ge(0.2, 1, 2), "is-rqmc") == -1.5
        assert predicted_rate(Gp(1, 1, 2), "pqmc") == -1.0
        assert predicted_rate(Ge(0.3, 1, 2), "is-pqmc") == -1.0
        with pytest.raises(ValidationError):
            predicted_rate(Ge(0.5, 1, 2), "rqmc")
        with pytest.raises(ValidationError):
            predicted_rate(Gp(1, 1, 2), "madeup")

    def test_divergent_risk_flag(self):
        assert Ge(0.5, 1, 2).divergent_risk
        assert not Ge(0.49, 1, 2).divergent_risk


class TestExpressionParser:
    def test_single_class(self):
        assert parse_class_expr("Ge(0.2,1,2)") == Ge(0.2, 1, 2)
        assert parse_class_expr(" Gp( 1 , 1 , 3 ) ") == Gp(1, 1, 3)

    def test_scale_and_add(self):
        out = parse_class_expr("2*Gp(1,1,3)+Ge(0.1,1,1)")
        assert out == add_classes(scale_class(2, Gp(1, 1, 3)), Ge(0.1, 1, 1))

    def test_product_of_classes(self):
        out = parse_class_expr("Ge(0.1,1,2)*Ge(0.2,1,2)")
        assert out == mul_classes(Ge(0.1, 1, 2), Ge(0.2, 1, 2))

    def test_parentheses(self):
        out = parse_class_expr("2*(Gp(1,1,2)+Gp(2,2,2))")
        assert out == scale_class(2, add_classes(Gp(1, 1, 2), Gp(2, 2, 2)))

    def test_errors(self):
        for bad in ("42", "Ge(0.2,1)", "Gp(1,1,2)+", "Gx(1,1,1)", "Ge(0.2,1,2) Gp(1,1,1)"):
            with pytest.raises(ValidationError):
                parse_class_expr(bad)
