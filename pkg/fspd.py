"""
fspd - European call prices under space-time fractional diffusion.

Sub-commands:
    price   one call price with its risk-neutral factor
    table   the (n, m) terms of the double series and the cumulative Call row
    batch   price every row of a CSV file
    mu      the risk-neutral factor by a chosen route
    green   samples of the Green function on an x grid
    smile   prices over a strike range, reusing one mu

Flags default to FSPD_-prefixed environment variables (see fspd_settings).

Exit codes: 0 success, 1 usage, 2 domain, 3 non-convergence, 4 I/O.

Example:
    python fspd.py price --alpha 1.7 --gamma 0.9 --sigma 0.2 \\
        --spot 3800 --strike 4000 --rate 0.01 --maturity 1
"""

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import List

import numpy as np
import pandas as pd
from pydantic import ValidationError

from fspd_errors import (ContourError, DomainError, FspdError, NegativePrice, NoConvergence,
                         NonPositiveSum)
from fspd_green import default_scale, green_mb_grid
from fspd_pricer import call_price_series, partial_sums, term_grid
from fspd_risk_neutral import MuCache, MuRoute, compute_mu
from fspd_settings import FspdSettings
from fspd_types import MarketQuote, ModelParams, SeriesControl, validate_model

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_CONVERGENCE, EXIT_IO = 0, 1, 2, 3, 4

ROUTES = {
    "series": MuRoute.SERIES,
    "mb": MuRoute.MELLIN_BARNES,
    "subordination": MuRoute.SUBORDINATION,
    "closed_form": MuRoute.CLOSED_FORM,
}

BATCH_COLUMNS = ["id", "spot", "strike", "rate", "dividend", "maturity", "alpha", "gamma", "sigma"]

# Flags taking a lo:hi:step range
RANGE_FLAGS = ("--x-grid", "--strikes")


class UsageError(Exception):
    """Malformed flags or input layout; exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _g12(value) -> float:
    return float(f"{value:.12g}")


def _emit_json(obj) -> None:
    print(json.dumps(obj))


def _emit_frame(frame: pd.DataFrame, fmt: str) -> None:
    if fmt == "csv":
        frame.to_csv(sys.stdout, index=False, float_format="%.12g", lineterminator="\n")
    elif fmt == "json":
        records = frame.to_dict(orient="records")
        _emit_json([{k: _g12(v) if isinstance(v, float) else v for k, v in r.items()} for r in records])
    else:
        print(frame.to_string(index=False, float_format=lambda v: f"{v:.3f}"))


# --------------------------------------------------------------------------
# Flags


def _add_model_args(p: argparse.ArgumentParser, settings: FspdSettings) -> None:
    p.add_argument("--alpha", type=float, default=settings.alpha, help="Space order, 1 < alpha <= 2")
    p.add_argument("--gamma", type=float, default=settings.gamma, help="Time order, 1 - 1/alpha < gamma <= alpha")
    p.add_argument("--sigma", type=float, default=settings.sigma, help="Volatility scale")
    p.add_argument("--theta", type=float, default=settings.theta, help="Asymmetry (default alpha - 2)")


def _add_quote_args(p: argparse.ArgumentParser, settings: FspdSettings, strike: bool = True) -> None:
    p.add_argument("--spot", type=float, default=settings.spot)
    if strike:
        p.add_argument("--strike", type=float, default=settings.strike)
    p.add_argument("--rate", type=float, default=settings.rate)
    p.add_argument("--dividend", type=float, default=settings.dividend)
    p.add_argument("--maturity", type=float, default=settings.maturity)


def _add_series_args(p: argparse.ArgumentParser, settings: FspdSettings) -> None:
    p.add_argument("--tol", type=float, default=settings.tol)
    p.add_argument("--max-index", type=int, default=settings.max_index)
    p.add_argument("--route", choices=sorted(ROUTES), default=settings.route, help="Route for mu")


def _required(args, *names: str) -> None:
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join(f"--{n.replace('_', '-')} (or FSPD_{n.upper()})" for n in missing)
        raise UsageError(f"missing {flags}")


def _model(args) -> ModelParams:
    _required(args, "alpha", "gamma", "sigma")
    return ModelParams(alpha=args.alpha, gamma=args.gamma, sigma=args.sigma, theta=args.theta)


def _quote(args, strike: float | None = None) -> MarketQuote:
    _required(args, "spot", "maturity")
    if strike is None:
        _required(args, "strike")
        strike = args.strike
    return MarketQuote(spot=args.spot, strike=strike, rate=args.rate,
                       dividend=args.dividend, maturity=args.maturity)


def _control(args) -> SeriesControl:
    return SeriesControl(tol=args.tol, max_index=args.max_index)


def _attach_ranges(argv: List[str]) -> List[str]:
    """
    Glue a range that starts with a minus sign onto its flag.

    argparse takes '-1:1:0.5' for an option, so '--x-grid -1:1:0.5' becomes
    '--x-grid=-1:1:0.5' before parsing.
    """
    out: List[str] = []
    for arg in argv:
        if out and out[-1] in RANGE_FLAGS and arg.startswith("-") and ":" in arg:
            out[-1] = f"{out[-1]}={arg}"
        else:
            out.append(arg)
    return out


def _grid(text: str) -> np.ndarray:
    """'lo:hi:step', inclusive of hi."""
    try:
        lo, hi, step = (float(part) for part in text.split(":"))
    except ValueError:
        raise UsageError(f"expected lo:hi:step, got {text!r}") from None
    if step <= 0 or hi < lo:
        raise UsageError(f"empty range {text!r}")
    return np.arange(lo, hi + step / 2, step)


# --------------------------------------------------------------------------
# Sub-commands


def cmd_price(args) -> int:
    params = validate_model(_model(args), for_pricing=True)
    quote = _quote(args)
    mu = compute_mu(params, ROUTES[args.route]).mu
    result = call_price_series(params, quote, mu, _control(args))
    if args.format == "json":
        _emit_json({"price": _g12(result.price), "mu": _g12(mu), "terms": result.terms_used,
                    "converged": result.converged,
                    "params": {k: _g12(v) for k, v in {**params.model_dump(), **quote.model_dump()}.items()}})
    elif args.format == "csv":
        _emit_frame(pd.DataFrame([{"price": result.price, "mu": mu, "terms": result.terms_used,
                                   "converged": result.converged}]), "csv")
    else:
        print(f"price     {result.price:.3f}")
        print(f"mu        {mu:.6f}")
        print(f"terms     {result.terms_used}")
        print(f"converged {result.converged}")
    return EXIT_OK


def cmd_table(args) -> int:
    params = validate_model(_model(args), for_pricing=True)
    quote = _quote(args)
    mu = compute_mu(params, ROUTES[args.route]).mu
    grid = term_grid(params, quote, mu, args.max_n, args.max_m)
    call = partial_sums(grid)
    if args.format == "csv":
        rows = [{"n": n, "m": m, "term": grid.term(n, m)}
                for n in range(grid.n_max + 1) for m in range(1, grid.m_max + 1)]
        _emit_frame(pd.DataFrame(rows, columns=["n", "m", "term"]), "csv")
    elif args.format == "json":
        _emit_json({"mu": _g12(mu),
                    "terms": [[_g12(v) for v in row] for row in grid.values],
                    "call": [_g12(v) for v in call]})
    else:
        frame = pd.DataFrame(grid.values, columns=[f"m={m}" for m in range(1, grid.m_max + 1)],
                             index=[f"n={n}" for n in range(grid.n_max + 1)])
        frame.loc["Call"] = call
        print(frame.to_string(float_format=lambda v: f"{v:.3f}"))
    return EXIT_OK


def _price_row(row: dict, cache: MuCache, control: SeriesControl) -> dict:
    try:
        params = validate_model(
            ModelParams(alpha=row["alpha"], gamma=row["gamma"], sigma=row["sigma"]), for_pricing=True)
        quote = MarketQuote(spot=row["spot"], strike=row["strike"], rate=row["rate"],
                            dividend=row["dividend"], maturity=row["maturity"])
        mu = cache.get(params).mu
        result = call_price_series(params, quote, mu, control)
    except (FspdError, ValidationError) as exc:
        logger.info("row %s: %s", row.get("id"), exc)
        return {"mu": None, "price": None, "terms": None, "converged": False,
                "error": str(exc).splitlines()[0]}
    return {"mu": mu, "price": result.price, "terms": result.terms_used,
            "converged": result.converged, "error": ""}


def cmd_batch(args) -> int:
    _required(args, "input", "output")
    try:
        frame = pd.read_csv(args.input)
    except pd.errors.EmptyDataError:
        raise UsageError(f"{args.input}: no header") from None
    missing = [c for c in BATCH_COLUMNS if c not in frame.columns]
    if missing:
        raise UsageError(f"{args.input}: header lacks {', '.join(missing)}")
    cache = MuCache()
    control = _control(args)
    rows = frame.to_dict(orient="records")
    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        priced = list(pool.map(lambda r: _price_row(r, cache, control), rows))
    out = pd.concat([frame, pd.DataFrame(priced, columns=["mu", "price", "terms", "converged", "error"])],
                    axis=1)
    out.to_csv(args.output, index=False, float_format="%.12g", lineterminator="\n")
    logger.info("priced %d rows, %d distinct mu", len(rows), len(cache))
    if rows and all(p["error"] for p in priced):
        print(f"no row of {args.input} could be priced", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def cmd_mu(args) -> int:
    _required(args, "alpha", "gamma", "sigma")
    params = ModelParams(alpha=args.alpha, gamma=args.gamma, sigma=args.sigma)
    result = compute_mu(params, ROUTES[args.route])
    if args.format == "json":
        _emit_json({"mu": _g12(result.mu), "route": result.route.value,
                    "terms_or_nodes": result.terms_or_nodes})
    elif args.format == "csv":
        _emit_frame(pd.DataFrame([{"mu": result.mu, "route": result.route.value,
                                   "terms_or_nodes": result.terms_or_nodes}]), "csv")
    else:
        print(f"mu {result.mu:.12g} ({result.route.value}, {result.terms_or_nodes} terms/nodes)")
    return EXIT_OK


def cmd_green(args) -> int:
    params = validate_model(_model(args))
    x = _grid(args.x_grid)
    x = x[x != 0]
    scale = args.scale if args.scale is not None else default_scale(params)
    g = green_mb_grid(x, args.t, params, scale=scale)
    _emit_frame(pd.DataFrame({"x": x, "g": g}), args.format)
    return EXIT_OK


def cmd_smile(args) -> int:
    _required(args, "strikes")
    params = validate_model(_model(args), for_pricing=True)
    strikes = _grid(args.strikes)
    mu = compute_mu(params, ROUTES[args.route]).mu
    control = _control(args)
    prices = [call_price_series(params, _quote(args, float(k)), mu, control).price for k in strikes]
    _emit_frame(pd.DataFrame({"strike": strikes, "price": prices}), args.format)
    return EXIT_OK


def build_parser(settings: FspdSettings) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=settings.verbose,
                        help="Enable debug logging")
    common.add_argument("--format", choices=["text", "json", "csv"], default=settings.format)

    parser = _Parser(prog="fspd", description="European call prices under space-time fractional diffusion.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("price", parents=[common], help="Price one European call")
    _add_model_args(p, settings)
    _add_quote_args(p, settings)
    _add_series_args(p, settings)
    p.set_defaults(handler=cmd_price)

    p = sub.add_parser("table", parents=[common], help="Terms (n, m) of the double series")
    _add_model_args(p, settings)
    _add_quote_args(p, settings)
    _add_series_args(p, settings)
    p.add_argument("--max-n", type=int, default=settings.max_n)
    p.add_argument("--max-m", type=int, default=settings.max_m)
    p.set_defaults(handler=cmd_table)

    p = sub.add_parser("batch", parents=[common], help="Price the rows of a CSV file")
    p.add_argument("--input", default=settings.input, help="CSV with header " + ",".join(BATCH_COLUMNS))
    p.add_argument("--output", default=settings.output)
    p.add_argument("--tol", type=float, default=settings.tol)
    p.add_argument("--max-index", type=int, default=settings.max_index)
    p.add_argument("--workers", type=int, default=settings.workers)
    p.set_defaults(handler=cmd_batch)

    p = sub.add_parser("mu", parents=[common], help="Risk-neutral factor")
    p.add_argument("--alpha", type=float, default=settings.alpha)
    p.add_argument("--gamma", type=float, default=settings.gamma)
    p.add_argument("--sigma", type=float, default=settings.sigma)
    p.add_argument("--route", choices=sorted(ROUTES), default=settings.route)
    p.set_defaults(handler=cmd_mu)

    p = sub.add_parser("green", parents=[common], help="Green function on an x grid")
    _add_model_args(p, settings)
    p.add_argument("--t", type=float, default=settings.t, help="Time at which g(x, t) is sampled")
    p.add_argument("--x-grid", default=settings.x_grid,
                   help="lo:hi:step, inclusive of hi, e.g. --x-grid -2:2:0.1; x = 0 is skipped")
    p.add_argument("--scale", type=float, default=settings.scale, help="Diffusion scale D (default (sigma/sqrt 2)^alpha)")
    p.set_defaults(handler=cmd_green)

    p = sub.add_parser("smile", parents=[common], help="Prices over a strike range")
    _add_model_args(p, settings)
    _add_quote_args(p, settings, strike=False)
    _add_series_args(p, settings)
    p.add_argument("--strikes", default=settings.strikes, help="lo:hi:step, inclusive of hi")
    p.set_defaults(handler=cmd_smile)
    return parser


def main(argv=None) -> int:
    try:
        settings = FspdSettings()
    except ValidationError as exc:
        print(f"error: invalid FSPD_ environment: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parser = build_parser(settings)
    args = parser.parse_args(_attach_ranges(sys.argv[1:] if argv is None else list(argv)))
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format='%(asctime)s - %(levelname)s - %(message)s')
    try:
        return args.handler(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"fspd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, ValidationError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (NoConvergence, ContourError, NonPositiveSum, NegativePrice) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
