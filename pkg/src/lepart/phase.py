"""Large-N phase structure of the two-community separation potentials.

Parameters follow the scaling family w1 = 1, w2 = N^(-beta), q = N^alpha
on two communities of N vertices. The (alpha, beta) plane splits into
regimes by the exact comparisons of alpha with 1/2 and with 1 - beta,
so regime labels are computed with rational arithmetic, never floats:

  f   alpha > 1/2               both potentials approach 1
  e   alpha = 1/2 < 1-beta      both approach the same interior constant
  a   alpha = 1/2 >= 1-beta     out approaches 1, in stays interior
  b   1-beta < alpha < 1/2      out approaches 1, in vanishes
  c   alpha = 1-beta < 1/2      out stays interior, in vanishes
  d   alpha < min(1/2, 1-beta)  both vanish

Exponents may be any rationals, negative ones included. beta = 0
collapses the model onto one complete graph, and beta < 0 makes cross
links heavier than internal ones, so the in/out distinction degenerates
to a zero gap; such anticommunity points still classify and evaluate,
they are only flagged so reports can call them out.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exact import u_two_community_exact
from .graphs import TwoCommunityModel
from .montecarlo import McConfig, estimate_potential

REGIME_LABELS = ("a", "b", "c", "d", "e", "f")

# Predicted limit of (u_in, u_out) as N grows, per regime; None marks
# an interior constant in (0, 1). In regime e both limits are the same
# constant.
REGIME_LIMITS = {
    "a": (None, 1.0),
    "b": (0.0, 1.0),
    "c": (0.0, None),
    "d": (0.0, 0.0),
    "e": (None, None),
    "f": (1.0, 1.0),
}

DEFAULT_POINTS = (
    (Fraction(1, 2), Fraction(4, 5)),    # a
    (Fraction(3, 10), Fraction(9, 10)),  # b
    (Fraction(2, 5), Fraction(3, 5)),    # c
    (Fraction(1, 5), Fraction(1, 5)),    # d
    (Fraction(1, 2), Fraction(1, 5)),    # e
    (Fraction(4, 5), Fraction(1, 2)),    # f
)

DEFAULT_SIZES = (100, 400, 1600)

# Community size up to which the closed-form double sum is evaluated;
# larger points fall back to forest sampling.
EXACT_LIMIT = 2000

MC_SAMPLES = 20000


def classify_regime(alpha, beta) -> str:
    """Regime label for rational exponents.

    Arguments pass through Fraction, so hand boundary points exact
    rationals (strings or Fractions); a float like 0.3 converts to its
    binary value, not to 3/10. Nonpositive exponents are fine, beta < 0
    just flips the model to anticommunities (see is_anticommunity).
    """
    alpha = Fraction(alpha)
    beta = Fraction(beta)
    half = Fraction(1, 2)
    edge = 1 - beta
    if alpha > half:
        return "f"
    if alpha == half:
        return "e" if alpha < edge else "a"
    if alpha > edge:
        return "b"
    if alpha == edge:
        return "c"
    return "d"


def is_anticommunity(beta) -> bool:
    """True when cross links outweigh internal ones (beta < 0)."""
    return Fraction(beta) < 0


@dataclass(frozen=True)
class PhaseRow:
    """Both potentials at one (alpha, beta, N) grid point."""

    alpha: Fraction
    beta: Fraction
    regime: str
    N: int
    u_in: float
    u_in_err: float
    u_out: float
    u_out_err: float
    method: str = "exact"

    @property
    def gap(self) -> float:
        return self.u_out - self.u_in

    @property
    def anticommunity(self) -> bool:
        return self.beta < 0

    @property
    def limits(self):
        """Predicted (u_in, u_out) limit for the row's regime."""
        return REGIME_LIMITS[self.regime]


def phase_point(
    alpha,
    beta,
    N: int,
    tail_tol: float = 1e-12,
    exact_limit: int = EXACT_LIMIT,
    mc_config: McConfig | None = None,
) -> PhaseRow:
    """Evaluate both potentials at one grid point.

    Up to exact_limit vertices per community the closed-form evaluator
    is used and the error columns are zero. Beyond that the double sum
    gets heavy, so the point is sampled with the forest estimator
    instead, by default MC_SAMPLES forests seeded from N; pass
    mc_config to override the sampling plan.
    """
    alpha = Fraction(alpha)
    beta = Fraction(beta)
    if N < 2:
        raise ValueError("N must be at least 2")
    regime = classify_regime(alpha, beta)
    q = float(N) ** float(alpha)
    w2 = float(N) ** (-float(beta))
    if N <= exact_limit:
        u_in = u_two_community_exact(N, 1.0, w2, q, "in", tail_tol=tail_tol).value
        u_out = u_two_community_exact(N, 1.0, w2, q, "out", tail_tol=tail_tol).value
        in_err = out_err = 0.0
        method = "exact"
    else:
        model = TwoCommunityModel(N, 1.0, w2)
        cfg = mc_config if mc_config is not None else McConfig.for_run(MC_SAMPLES, base_seed=N)
        inside = estimate_potential(model, q, 0, 1, cfg, method="forest")
        outside = estimate_potential(model, q, 0, N, cfg, method="forest")
        u_in, in_err = inside.mean, inside.stderr
        u_out, out_err = outside.mean, outside.stderr
        method = "monte-carlo"
    return PhaseRow(
        alpha=alpha,
        beta=beta,
        regime=regime,
        N=N,
        u_in=u_in,
        u_in_err=in_err,
        u_out=u_out,
        u_out_err=out_err,
        method=method,
    )


def sweep(
    points=None,
    sizes=None,
    tail_tol: float = 1e-12,
    exact_limit: int = EXACT_LIMIT,
    mc_config: McConfig | None = None,
):
    """Evaluate the grid; rows are ordered by point, then by N."""
    if points is None:
        points = DEFAULT_POINTS
    if sizes is None:
        sizes = DEFAULT_SIZES
    return [
        phase_point(
            alpha, beta, n,
            tail_tol=tail_tol, exact_limit=exact_limit, mc_config=mc_config,
        )
        for alpha, beta in points
        for n in sizes
    ]


def detectability_gap(alpha, beta, N: int, **kwargs) -> float:
    """u_out - u_in at one grid point; large gaps separate the communities."""
    return phase_point(alpha, beta, N, **kwargs).gap


def rows_to_csv(rows, note: str | None = None) -> str:
    """Render sweep rows to CSV, optionally prefixed by a comment line."""
    lines = []
    if note:
        lines.append(f"# {note}")
    lines.append("alpha,beta,regime,N,u_in,u_in_err,u_out,u_out_err,gap")
    for r in rows:
        lines.append(
            f"{r.alpha},{r.beta},{r.regime},{r.N},"
            f"{r.u_in!r},{r.u_in_err!r},{r.u_out!r},{r.u_out_err!r},{r.gap!r}"
        )
    return "\n".join(lines) + "\n"


def rows_to_records(rows):
    """Sweep rows as JSON-ready dictionaries with full metadata."""
    records = []
    for r in rows:
        lim_in, lim_out = r.limits
        records.append(
            {
                "alpha": str(r.alpha),
                "beta": str(r.beta),
                "regime": r.regime,
                "anticommunity": r.anticommunity,
                "N": r.N,
                "u_in": r.u_in,
                "u_in_err": r.u_in_err,
                "u_out": r.u_out,
                "u_out_err": r.u_out_err,
                "gap": r.gap,
                "limit_in": "interior" if lim_in is None else lim_in,
                "limit_out": "interior" if lim_out is None else lim_out,
                "method": r.method,
            }
        )
    return records
