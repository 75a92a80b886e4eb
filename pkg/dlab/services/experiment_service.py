# dlab/services/experiment_service.py
# Experiment registry and runner: config parsing, dispatch to the
# computational services and atomic CSV output.

from typing import Any, Callable, Dict, List, NamedTuple, Tuple, Type
import hashlib
import json
import logging
import math
import time

import numpy as np
from pydantic import ValidationError as PydanticValidationError

from dlab import __version__
from dlab.core.exceptions import ConfigParseError, DirichletLabException, ValidationError
from dlab.models.schemas import (
    EXPERIMENT_NAMES,
    ExperimentConfig,
    ExperimentInfo,
    ExperimentParams,
    FieldParams,
    GcdsumParams,
    HelsonParams,
    HilbertParams,
    NormsParams,
    PartialsumParams,
    RandmultParams,
    RunReport,
    SidonParams,
    ZetamaxParams,
)
from dlab.services import dirichlet, gcdsums, norms, randmult, zeta
from dlab.utils.csv_output import write_csv_atomic

logger = logging.getLogger("dlab")

# (header, rows, extra preamble lines)
Table = Tuple[List[str], List[List[Any]], List[str]]


class ExperimentEntry(NamedTuple):
    params_model: Type[ExperimentParams]
    runner: Callable[[Any, int], Table]
    description: str


def _run_norms(params: NormsParams, seed: int) -> Table:
    header = ["N", "gamma", "p", "estimate", "stderr", "samples", "norm_h2", "helson_bound", "euler_shape"]
    rows = []
    for N in params.N_values:
        for gamma in params.gamma_values:
            F = dirichlet.divisor_weighted_polynomial(N, gamma)
            h2 = norms.norm_h2(F)
            for p in params.p_values:
                estimate = norms.norm_hp_mc(F, p, params.samples, seed)
                bound = norms.helson_lower_bound(F, p) if p <= 2 else None
                shape = norms.euler_lower_bound_shape(N, p) if N >= 2 else None
                rows.append([N, gamma, p, estimate.value, estimate.stderr, params.samples, h2, bound, shape])
    return header, rows, ["polynomial=sum d(n)^gamma n^(-1/2-s)"]


def _run_gcdsum(params: GcdsumParams, seed: int) -> Table:
    header = ["N", "alpha", "strategy", "gamma", "lambda", "set", "reference"]
    rows = []
    for N in params.N_values:
        for alpha in params.alpha_values:
            result = gcdsums.optimize_gamma(N, params.universe_limit, alpha, params.strategy)
            reference = gcdsums.reference_asymptotics(alpha, N) if N >= 16 and alpha <= 1 else None
            rows.append([N, alpha, result.strategy, result.gamma, result.lambda_, result.indices, reference])
    return header, rows, [f"universe_limit={params.universe_limit}", gcdsums.REFERENCE_NOTE]


def _run_randmult(params: RandmultParams, seed: int) -> Table:
    if params.mode == "homogeneous":
        header = ["N", "m", "p", "lp_estimate", "stderr", "exact_l2", "trials", "seed"]
        rows = []
        for N in params.N_values:
            for m in params.m_values:
                result = randmult.homogeneous_moment_experiment(N, m, params.p, params.trials, seed)
                rows.append([N, m, params.p, result.lp.value, result.lp.stderr, result.exact_l2, params.trials, seed])
        return header, rows, ["model=steinhaus"]

    header = ["N", "model", "exponent", "estimate", "stderr", "trials", "seed"]
    rows = []
    for N in params.N_values:
        for exponent in params.exponents:
            estimate = randmult.moment_estimate(params.model, N, exponent, params.trials, seed)
            rows.append([N, params.model, exponent, estimate.value, estimate.stderr, params.trials, seed])
    return header, rows, []


def _run_helson(params: HelsonParams, seed: int) -> Table:
    header = ["N", "mean_abs_sum", "stderr", "ratio_to_sqrtN"]
    rows = []
    for N in params.N_values:
        estimate = randmult.moment_estimate("steinhaus", N, 1.0, params.trials, seed)
        ratio = estimate.value / math.sqrt(N)
        logger.info(f"Helson ratio E|sum chi(n)|/sqrt(N) at N={N}: {ratio} (stderr {estimate.stderr / math.sqrt(N)})")
        rows.append([N, estimate.value, estimate.stderr, ratio])
    return header, rows, [f"trials={params.trials}", "inspection only: no limit is asserted"]


def _run_zetamax(params: ZetamaxParams, seed: int) -> Table:
    header = ["N", "t_lo", "t_hi", "gridpoints", "t_star", "value"]
    rows = []
    for N in params.N_values:
        candidates = None
        if params.resonator_set:
            candidates = zeta.resonant_t_candidates(
                N, [n for n in params.resonator_set if n <= N] or [1], params.t_lo, params.t_hi, params.gridpoints
            )
        result = zeta.max_abs_partial(N, params.t_lo, params.t_hi, params.gridpoints, params.refine, candidates)
        rows.append([N, params.t_lo, params.t_hi, params.gridpoints, result.t_star, result.value])
    return header, rows, [f"refine={str(params.refine).lower()}"]


def _run_sidon(params: SidonParams, seed: int) -> Table:
    header = ["N", "S_N_estimate", "grid_per_dim", "restarts"]
    rows = [
        [N, zeta.sidon_constant(N, params.grid_per_dim, params.restarts, seed), params.grid_per_dim, params.restarts]
        for N in params.N_values
    ]
    return header, rows, ["best value found; a lower estimate of the supremum"]


def _run_hilbert(params: HilbertParams, seed: int) -> Table:
    header = ["M", "norm"]
    rows = [[M, zeta.hilbert_norm(zeta.hilbert_truncation(M))] for M in range(1, params.max_size + 1)]
    return header, rows, []


def _run_field(params: FieldParams, seed: int) -> Table:
    header = ["prime_limit", "draw", "x_star", "m"]
    rows = []
    notes = []
    for P in params.prime_limits:
        maxima = randmult.field_max_draws(P, params.gridpoints, params.draws, seed)
        values = np.asarray([result.m for result in maxima])
        overlay = randmult.field_max_overlay(P)
        logger.info(f"Field P={P}: mean max {float(np.mean(values))} over {params.draws} draws, overlay {overlay}")
        notes.append(f"overlay P={P} loglogP-0.75logloglogP={overlay!r}")
        rows.extend([P, draw, result.x_star, result.m] for draw, result in enumerate(maxima))
    return header, rows, notes


def _run_partialsum(params: PartialsumParams, seed: int) -> Table:
    header = ["N", "length", "p", "ratio", "stderr", "samples", "seed"]
    rows = []
    for N in params.N_values:
        length = params.length_factor * N
        F = dirichlet.divisor_weighted_polynomial(length, 0.0, sigma=0.0)
        for p in params.p_values:
            estimate = zeta.partial_sum_ratio(F, N, p, params.samples, seed)
            rows.append([N, length, p, estimate.value, estimate.stderr, params.samples, seed])
    return header, rows, ["polynomial=sum_{n<=length} n^(-s)"]


_REGISTRY: Dict[str, ExperimentEntry] = {
    "norms": ExperimentEntry(
        NormsParams, _run_norms,
        "Monte Carlo H^p norms of sum d(n)^gamma n^(-1/2-s) with the H^2 norm and coefficient lower bound"
    ),
    "gcdsum": ExperimentEntry(
        GcdsumParams, _run_gcdsum,
        "Extremal GCD sums Gamma_alpha(N) and the top eigenvalue of the GCD matrix"
    ),
    "randmult": ExperimentEntry(
        RandmultParams, _run_randmult,
        "Moments of partial sums of random multiplicative functions, or L^p vs L^2 of homogeneous polynomials"
    ),
    "helson": ExperimentEntry(
        HelsonParams, _run_helson,
        "Helson ratio E|sum_{n<=N} chi(n)|/sqrt(N) for Steinhaus chi"
    ),
    "zetamax": ExperimentEntry(
        ZetamaxParams, _run_zetamax,
        "Maximum of |sum_{n<=N} n^(-1/2-it)| over a t window, optionally seeded by a resonator"
    ),
    "sidon": ExperimentEntry(
        SidonParams, _run_sidon,
        "Numerical Sidon constant S(N) for N <= 6 over the Bohr torus"
    ),
    "hilbert": ExperimentEntry(
        HilbertParams, _run_hilbert,
        "Norms of truncations of the multiplicative Hilbert matrix"
    ),
    "field": ExperimentEntry(
        FieldParams, _run_field,
        "Maxima over [0, 1] of the random Euler-product field X(x)"
    ),
    "partialsum": ExperimentEntry(
        PartialsumParams, _run_partialsum,
        "Norm ratio of the partial sum operator S_N on sum_{n<=kN} n^(-s)"
    ),
}


def _format_errors(e: PydanticValidationError) -> str:
    parts = []
    for error in e.errors():
        location = ".".join(str(item) for item in error["loc"]) or "config"
        parts.append(f"{location}: {error['msg']}")
    return "; ".join(parts)


def parse_config(text: str) -> ExperimentConfig:
    """
    Parse and validate an experiment config

    The returned config carries the experiment params with all defaults
    filled in.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigParseError(f"Malformed config JSON at line {e.lineno} column {e.colno}: {e.msg}")

    if not isinstance(data, dict):
        raise ValidationError("Config must be a JSON object")
    name = data.get("experiment")
    if not isinstance(name, str) or name not in _REGISTRY:
        raise ValidationError(f"Unknown experiment {name!r}; valid names: {', '.join(EXPERIMENT_NAMES)}")

    try:
        config = ExperimentConfig.model_validate(data)
        params = _REGISTRY[name].params_model.model_validate(config.params)
    except PydanticValidationError as e:
        raise ValidationError(f"Invalid {name} config: {_format_errors(e)}")

    return config.model_copy(update={"params": params.model_dump(mode="json")})


def serialize_config(config: ExperimentConfig) -> str:
    return config.model_dump_json()


def config_hash(config: ExperimentConfig) -> str:
    return hashlib.sha256(serialize_config(config).encode("utf-8")).hexdigest()


class ExperimentService:
    def __init__(self):
        from dlab.core.config import get_settings
        self.settings = get_settings()

    def list_experiments(self) -> List[ExperimentInfo]:
        """One entry per experiment with its required params"""
        return [
            ExperimentInfo(
                name=name,
                required_params=[key for key, field in entry.params_model.model_fields.items() if field.is_required()],
                description=entry.description
            )
            for name, entry in _REGISTRY.items()
        ]

    def run_experiment(self, config: ExperimentConfig) -> RunReport:
        """
        Run one experiment and write its CSV atomically

        Identical configs give byte-identical files for any thread count.
        The preamble records the Monte Carlo block size, which selects the
        random streams. Failures from the services propagate unchanged with
        the experiment name attached as a note.
        """
        entry = _REGISTRY[config.experiment]
        try:
            params = entry.params_model.model_validate(config.params)
        except PydanticValidationError as e:
            raise ValidationError(f"Invalid {config.experiment} config: {_format_errors(e)}")

        digest = config_hash(config)
        logger.info(
            f"Running {config.experiment} (seed {config.seed}, config {digest[:12]}, "
            f"threads {self.settings.threads or 'auto'})"
        )
        start = time.perf_counter()

        try:
            header, rows, notes = entry.runner(params, config.seed)
            preamble = [
                f"dirichlet-lab {__version__} config_sha256={digest} seed={config.seed}",
                f"config={serialize_config(config)}",
                f"mc_block_size={self.settings.mc_block_size}",
            ] + notes
            rows_written = write_csv_atomic(config.output_path, preamble, header, rows)
        except DirichletLabException as e:
            e.add_note(f"experiment: {config.experiment}")
            logger.error(f"Experiment {config.experiment} failed: {str(e)}")
            raise

        wall_time = time.perf_counter() - start
        logger.info(f"{config.experiment} finished in {wall_time:.2f}s, {rows_written} rows")
        return RunReport(
            config_echo=config,
            rows_written=rows_written,
            wall_time_seconds=wall_time,
            artifact_version=__version__,
            output_path=config.output_path,
            config_hash=digest
        )
