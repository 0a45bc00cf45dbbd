"""Command-line interface.

Every command is a thin client of the HTTP service: by default requests
run in process against the application via an ASGI transport, and
``--url`` points them at a remote server instead.

Exit codes: 0 success (for ``reduce``, both Reduced and FallbackUsed),
1 failed verification, 2 unreadable or malformed input, 3 a reduction
that did not reach its bound.
"""

from __future__ import annotations

import asyncio
import json
import pathlib
import sys

import click
import httpx


def _fail(code: int, message: str):
    click.echo(message, err=True)
    raise SystemExit(code)


def _call(url: str | None, path: str, payload: dict) -> tuple[int, dict]:
    if url:
        try:
            resp = httpx.post(url.rstrip("/") + path, json=payload, timeout=600.0)
        except httpx.HTTPError as exc:
            _fail(2, f"request to {url} failed: {exc}")
        return resp.status_code, resp.json()

    from .service.app import create_app

    async def go():
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://krausfold.local", timeout=600.0
        ) as client:
            resp = await client.post(path, json=payload)
            return resp.status_code, resp.json()

    return asyncio.run(go())


def _detail(body: dict) -> str:
    if isinstance(body, dict) and "detail" in body:
        detail = body["detail"]
        return detail if isinstance(detail, str) else json.dumps(detail)
    return json.dumps(body)


def _load_kraus_file(path: str) -> dict:
    try:
        text = pathlib.Path(path).read_text()
    except OSError as exc:
        _fail(2, f"cannot read {path}: {exc}")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        _fail(2, f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")
    if not isinstance(obj, dict):
        _fail(2, f"{path}: expected a JSON object at the top level")
    return obj


_URL_OPTION = click.option(
    "--url", default=None, metavar="URL", help="Use a remote service instead of in-process."
)


@click.group()
def main():
    """Incoherent Kraus verification, reduction and region tools."""


@main.command()
@click.argument("path", type=click.Path())
@_URL_OPTION
def verify(path, url):
    """Check a Kraus JSON file: CPTP completeness and incoherence."""
    kraus = _load_kraus_file(path)
    status, body = _call(url, "/verify", {"kraus": kraus})
    if status == 422:
        _fail(2, f"{path}: {_detail(body)}")
    if status != 200:
        _fail(2, f"unexpected response {status}: {_detail(body)}")
    click.echo(f"dim: {body['dim']}  operators: {body['op_count']}")
    click.echo(f"completeness defect: {body['completeness_defect']:.3e}")
    click.echo(f"channel: {'yes' if body['is_channel'] else 'no'}")
    for op in body["operators"]:
        sig = tuple(op["signature"]) if op["signature"] else "-"
        cls = op["class_index"] if op["class_index"] is not None else "-"
        click.echo(
            f"op {op['index']:>2}: incoherent={'yes' if op['incoherent'] else 'NO'} "
            f"strict={'yes' if op['strictly_incoherent'] else 'no'} "
            f"signature={sig} class={cls}"
        )
    for problem in body["problems"]:
        click.echo(f"problem: {problem}")
    if body["valid"]:
        click.echo("PASS")
    else:
        click.echo("FAIL")
        raise SystemExit(1)


@main.command()
@click.argument("path", type=click.Path())
@click.option(
    "--regime",
    required=True,
    type=click.Choice(["qubit-io", "qutrit-io", "qutrit-sio"]),
    help="Reduction driver to apply.",
)
@click.option("--out", default=None, type=click.Path(), help="Write the reduced set here.")
@click.option("--force-fallback", is_flag=True, help="Skip closed forms; use numeric routes.")
@_URL_OPTION
def reduce(path, regime, out, force_fallback, url):
    """Reduce a canonical Kraus set and print the certification report."""
    kraus = _load_kraus_file(path)
    payload = {"kraus": kraus, "regime": regime, "force_fallback": force_fallback}
    status, body = _call(url, "/reduce", payload)
    if status == 422:
        _fail(2, f"{path}: {_detail(body)}")
    if status != 200:
        _fail(2, f"unexpected response {status}: {_detail(body)}")
    if out:
        try:
            pathlib.Path(out).write_text(json.dumps(body["reduced"], indent=1) + "\n")
        except OSError as exc:
            _fail(2, f"cannot write {out}: {exc}")
    click.echo(json.dumps(body["report"], indent=2))
    if body["report"]["status"] == "NotReduced":
        raise SystemExit(3)


def _parse_section(value: str) -> tuple[int, int]:
    parts = value.split(",")
    try:
        i, j = (int(p) for p in parts)
    except ValueError:
        raise click.BadParameter("expected two comma-separated indices, e.g. 1,7")
    if not (1 <= i <= 8 and 1 <= j <= 8) or i == j:
        raise click.BadParameter("indices must be distinct and within 1..8")
    return i, j


@main.command()
@click.option("--section", required=True, metavar="I,J", help="Bloch coordinate pair, 1-based.")
@click.option("--ti", default=0.5, show_default=True, help="Initial value of coordinate I.")
@click.option("--tj", default=0.5, show_default=True, help="Initial value of coordinate J.")
@click.option(
    "--kind", default="sio", show_default=True, type=click.Choice(["sio", "io"]),
    help="Channel family to sample.",
)
@click.option("--n", default=0, show_default=True, help="Number of samples.")
@click.option("--seed", default=0, show_default=True, help="Sampling seed.")
@click.option("--csv", "csv_path", required=True, type=click.Path(), help="CSV output path.")
@click.option("--svg", "svg_path", default=None, type=click.Path(), help="SVG output path.")
@_URL_OPTION
def region(section, ti, tj, kind, n, seed, csv_path, svg_path, url):
    """Sample channels and record final-state coordinates and margins."""
    i, j = _parse_section(section)
    t = [0.0] * 8
    t[i - 1] = ti
    t[j - 1] = tj
    payload = {"t": t, "kind": kind, "n_samples": n, "seed": seed, "svg": bool(svg_path)}
    status, body = _call(url, "/region", payload)
    if status == 422:
        _fail(2, _detail(body))
    if status != 200:
        _fail(2, f"unexpected response {status}: {_detail(body)}")
    try:
        pathlib.Path(csv_path).write_text(body["csv"])
        if svg_path:
            pathlib.Path(svg_path).write_text(body["svg"])
    except OSError as exc:
        _fail(2, f"cannot write output: {exc}")
    summary = body["summary"]
    click.echo(f"samples: {summary['n']}  rejected draws: {summary['rejected_draws']}")
    if summary["m_min"] is not None:
        for cid in sorted(summary["violations"], key=int):
            margin = summary["min_margin"].get(str(cid), summary["min_margin"].get(cid))
            margin_text = f"{margin:.3e}" if margin is not None else "-"
            click.echo(
                f"condition {cid}: violations={summary['violations'][cid]} "
                f"min margin={margin_text}"
            )
    click.echo(f"wrote {csv_path}" + (f" and {svg_path}" if svg_path else ""))


@main.command(name="choi-rank")
@click.argument("path", type=click.Path())
@click.option("--tol", default=1e-10, show_default=True, help="Relative eigenvalue cutoff.")
@_URL_OPTION
def choi_rank_cmd(path, tol, url):
    """Print the Choi rank and eigenvalue tail of a Kraus set."""
    kraus = _load_kraus_file(path)
    status, body = _call(url, "/choi-rank", {"kraus": kraus, "tol": tol})
    if status == 422:
        _fail(2, f"{path}: {_detail(body)}")
    if status == 400:
        _fail(1, f"{path}: {_detail(body)}")
    if status != 200:
        _fail(2, f"unexpected response {status}: {_detail(body)}")
    spectrum = body["spectrum"]
    rank = body["rank"]
    click.echo(f"choi rank: {rank}")
    click.echo("spectrum (descending): " + " ".join(f"{v:.6e}" for v in spectrum))
    tail = spectrum[rank:]
    if tail:
        click.echo("tail beyond rank: " + " ".join(f"{v:.3e}" for v in tail))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
