"""Command-line client for the experiment service.

The CLI is a thin HTTP client.  By default it mounts the FastAPI app
in-process over an ASGI transport, so no server or network is needed and
runs stay reproducible; ``--server`` points the same requests at a remote
instance instead.  Exit codes: 0 when every assertion in the report(s)
passed, 1 on an assertion failure, 2 for usage or parameter errors.
"""

from __future__ import annotations

import asyncio
import sys
from pathlib import Path

import click
import httpx

from .experiments import ExperimentReport
from .service.schemas import ReportModel

_TIMEOUT = 3600.0


def _request(server: str | None, path: str, payload: dict) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=_TIMEOUT) as client:
            return client.post(path, json=payload)

    from .service.app import create_app

    transport = httpx.ASGITransport(app=create_app())

    async def go() -> httpx.Response:
        async with httpx.AsyncClient(
            transport=transport, base_url="http://walsh-fejer.local", timeout=_TIMEOUT
        ) as client:
            return await client.post(path, json=payload)

    return asyncio.run(go())


def _run_experiment(
    server: str | None,
    path: str,
    payload: dict,
    out: str | None,
    dump: str | None,
) -> None:
    response = _request(server, path, payload)
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        click.echo(f"error: {detail}", err=True)
        sys.exit(2)
    body = response.json()
    models = [ReportModel.model_validate(m) for m in (body if isinstance(body, list) else [body])]
    reports = [m.to_report() for m in models]

    for report in reports:
        _print_report(report)
    if out:
        _write_csvs(reports, Path(out))
    if dump:
        payloads = [r.stepfn for r in reports if r.stepfn]
        if not payloads:
            click.echo("error: this experiment produces no step function to dump", err=True)
            sys.exit(2)
        Path(dump).write_text(payloads[0], encoding="utf-8")
        click.echo(f"wrote step function to {dump}")

    sys.exit(0 if all(r.passed for r in reports) else 1)


def _print_report(report: ExperimentReport) -> None:
    click.echo(f"== {report.experiment} (mode={report.mode}) ==")
    for key, value in report.params.items():
        click.echo(f"  param   {key} = {value}")
    for key, value in report.summary.items():
        click.echo(f"  summary {key} = {value}")
    for a in report.assertions:
        status = "PASS" if a.passed else "FAIL"
        click.echo(f"  [{status}] {a.name}: {a.detail}")


def _write_csvs(reports: list[ExperimentReport], out: Path) -> None:
    if len(reports) == 1:
        out.write_text(reports[0].to_csv(), encoding="utf-8", newline="\n")
        click.echo(f"wrote {out}")
        return
    for report in reports:
        target = out.with_name(f"{out.stem}_{report.experiment}{out.suffix or '.csv'}")
        target.write_text(report.to_csv(), encoding="utf-8", newline="\n")
        click.echo(f"wrote {target}")


def _read_text(path: str | None) -> str | None:
    if path is None:
        return None
    return Path(path).read_text(encoding="utf-8")


server_option = click.option("--server", default=None, help="Remote service URL (default: in-process).")
mode_option = click.option("--mode", type=click.Choice(["exact", "float"]), default="exact", show_default=True)
out_option = click.option("--out", default=None, help="Write the report as CSV to this path.")
dump_option = click.option("--dump", default=None, help="Write the experiment's step function to this path.")


@click.group()
def main() -> None:
    """Walsh-Fejér summability experiments on the dyadic group."""


@main.command("strong-sum")
@click.option("--p", default="1/4", show_default=True, help="Exponent p in (0, 1/2].")
@click.option("--n-max", default=4096, show_default=True, type=int)
@click.option("--depth", default=4, show_default=True, type=int, help="Support depth of the built-in atom.")
@click.option("--log-base", type=click.Choice(["2", "e"]), default="2", show_default=True)
@click.option("--load", default=None, help="Use this serialized step function as the source.")
@mode_option
@out_option
@dump_option
@server_option
def strong_sum(p, n_max, depth, log_base, load, mode, out, dump, server) -> None:
    """Weighted strong sums of Fejér means of an atom stay bounded."""
    payload = {
        "p": p,
        "n_max": n_max,
        "depth": depth,
        "log_base": log_base,
        "mode": mode,
        "source_stepfn": _read_text(load),
    }
    _run_experiment(server, "/experiments/strong-sum", payload, out, dump)


@main.command("weak-divergence")
@click.option("--spec", default=None, help="Lacunary spec file (p=, alpha=, phi= lines).")
@click.option("--k-max", default=None, type=int, help="Use only the first k indices of the spec.")
@mode_option
@out_option
@dump_option
@server_option
def weak_divergence(spec, k_max, mode, out, dump, server) -> None:
    """Weak-quasinorm sums of the lacunary martingale grow without bound."""
    payload = {"spec_text": _read_text(spec), "k_max": k_max, "mode": mode}
    _run_experiment(server, "/experiments/weak-divergence", payload, out, dump)


@main.command("average-divergence")
@click.option("--m-min", default=4, show_default=True, type=int)
@click.option("--m-max", default=10, show_default=True, type=int)
@mode_option
@out_option
@dump_option
@server_option
def average_divergence(m_min, m_max, mode, out, dump, server) -> None:
    """Cesàro averages of L_{1/2} Fejér quasinorms grow along block martingales."""
    payload = {"m_min": m_min, "m_max": m_max, "mode": mode}
    _run_experiment(server, "/experiments/average-divergence", payload, out, dump)


@main.command("variation-average")
@click.option("--n-max", default=1 << 20, show_default=True, type=int)
@mode_option
@out_option
@server_option
def variation_average(n_max, mode, out, server) -> None:
    """Running averages of the binary variation against both log conventions."""
    payload = {"n_max": n_max, "mode": mode}
    _run_experiment(server, "/experiments/variation-average", payload, out, None)


@main.command("kernel-scans")
@click.option("--n-max", default=1 << 14, show_default=True, type=int)
@mode_option
@out_option
@server_option
def kernel_scans(n_max, mode, out, server) -> None:
    """Kernel norm scans: L1 sups, the variation sandwich, tail and block bounds."""
    payload = {"n_max": n_max, "mode": mode}
    _run_experiment(server, "/experiments/kernel-scans", payload, out, None)


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host: str, port: int) -> None:
    """Run the experiment service with uvicorn."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
