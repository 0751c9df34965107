"""``cic`` — command line client for the region/simulation service.

Every verb except ``serve`` talks to the HTTP API: in-process by default
(no socket, no extra process), or to a running server when ``--server``
is given.  All stdout is canonical JSON — keys sorted, two-space indent,
single trailing newline — so repeated runs with equal inputs are
byte-identical and safe to diff.

Exit codes: 0 success, 1 a checked property is falsified (containment or
an exponent identity), 2 invalid input (bad config, schema violation, or
a request over the desk-scale budget — the offending budgets are printed
to stderr).

Set ``CIC_LOG=debug`` (or any logging level name) to see service logs.
"""

import json
import logging
import os
import warnings

import click
import httpx

RATE_KEYS = ("r1p", "r1c", "r2c", "r2p", "rp2c", "rp2p")


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _client(server: str | None) -> httpx.Client:
    if server is not None:
        return httpx.Client(base_url=server, timeout=600.0)
    with warnings.catch_warnings():
        # starlette warns about the installed httpx major on import
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient
    from .service import create_app
    return TestClient(create_app(), base_url="http://cic.local",
                      raise_server_exceptions=False)


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    try:
        resp = client.post(path, json=payload)
    except httpx.HTTPError as exc:
        click.echo(f"request to {path} failed: {exc}", err=True)
        raise SystemExit(2)
    if resp.status_code >= 400:
        try:
            detail = resp.json()
        except ValueError:
            detail = {"error": resp.text}
        click.echo(canonical_json(detail), err=True, nl=False)
        raise SystemExit(2)
    return resp.json()


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, ValueError) as exc:
        click.echo(f"cannot read instance config {path}: {exc}", err=True)
        raise SystemExit(2)


def _parse_rates(text: str) -> dict:
    parts = text.split(",")
    if len(parts) != 6:
        raise click.UsageError(
            f"--rates needs 6 comma-separated values ({','.join(RATE_KEYS)}), got {len(parts)}")
    try:
        values = [float(p) for p in parts]
    except ValueError as exc:
        raise click.UsageError(f"--rates: {exc}")
    return dict(zip(RATE_KEYS, values))


def _parse_sweep(text: str) -> list[float]:
    try:
        lo, hi, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise click.UsageError("--sweep-rp2c must look like lo:hi:step, e.g. 0.0:0.6:0.05")
    if step <= 0 or hi < lo:
        raise click.UsageError("--sweep-rp2c needs step > 0 and hi >= lo")
    values = []
    k = 0
    while (v := lo + k * step) <= hi + 1e-12:
        values.append(round(v, 12))
        k += 1
    return values


def _write_out(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        click.echo(f"cannot write {path}: {exc}", err=True)
        raise SystemExit(2)


def _polygon_csv(doc: dict) -> str:
    lines = ["r1,r2"]
    for r1, r2 in doc["polygon"]["vertices"]:
        lines.append(f"{float(r1)!r},{float(r2)!r}")
    return "\n".join(lines) + "\n"


def _sweep_csv(doc: dict) -> str:
    lines = ["rp2c,success_rate,n,bin_size,successes"]
    for row in doc["rows"]:
        lines.append(f"{float(row['rp2c'])!r},{float(row['success_rate'])!r},"
                     f"{doc['n']},{row['bin_size']},{row['successes']}")
    return "\n".join(lines) + "\n"


def _random_payload(count: int, seed: int, q_card: int) -> dict:
    return {"count": count, "seed": seed, "q_card": q_card}


@click.group()
@click.option("--server", metavar="URL", default=None,
              help="Talk to a running server instead of computing in-process.")
@click.pass_context
def main(ctx, server):
    """Rate regions and coding experiments for a two-sender channel with
    one informed encoder."""
    level = os.environ.get("CIC_LOG")
    if level:
        logging.basicConfig(level=level.upper(),
                            format="%(asctime)s %(name)s %(levelname)s %(message)s")
    ctx.obj = {"server": server}


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Instance config JSON.")
@click.option("--system", type=click.Choice(["dmt", "corrected"]), required=True,
              help="Which bound family to project.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Also write the result to a file (.csv for vertices only).")
@click.pass_obj
def region(obj, config_path, system, out_path):
    """Project one bound family to the (R1, R2) plane."""
    client = _client(obj["server"])
    doc = _post(client, "/v1/region",
                {"instance": _load_config(config_path), "system": system})
    text = canonical_json(doc)
    click.echo(text, nl=False)
    if out_path:
        _write_out(out_path, _polygon_csv(doc) if out_path.endswith(".csv") else text)


@main.command()
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Instance config JSON.")
@click.option("--random", "random_count", type=int, default=None, metavar="N",
              help="Compare N server-generated random instances instead.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed for --random.")
@click.option("--q-card", type=int, default=1, show_default=True,
              help="Time-sharing alphabet size for --random.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Also write the JSON result to a file.")
@click.pass_obj
def compare(obj, config_path, random_count, seed, q_card, out_path):
    """Project both bound families and check the corrected region contains
    the earlier one.  Exits 1 on a containment failure."""
    if (config_path is None) == (random_count is None):
        raise click.UsageError("provide exactly one of --config or --random N")
    client = _client(obj["server"])
    if config_path is not None:
        doc = _post(client, "/v1/compare", {"instance": _load_config(config_path)})
        ok = doc["inclusion"]
    else:
        doc = _post(client, "/v1/compare/batch",
                    {"random": _random_payload(random_count, seed, q_card)})
        ok = doc["all_included"]
    text = canonical_json(doc)
    click.echo(text, nl=False)
    if out_path:
        _write_out(out_path, text)
    if not ok:
        raise SystemExit(1)


@main.command(name="check-identities")
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Instance config JSON.")
@click.option("--random", "random_count", type=int, default=None, metavar="N",
              help="Check N server-generated random instances instead.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed for --random.")
@click.option("--q-card", type=int, default=1, show_default=True,
              help="Time-sharing alphabet size for --random.")
@click.pass_obj
def check_identities(obj, config_path, random_count, seed, q_card):
    """Check every decoding-event exponent equals its bound's rhs.
    Exits 1 if any residual exceeds 1e-9."""
    if (config_path is None) == (random_count is None):
        raise click.UsageError("provide exactly one of --config or --random N")
    client = _client(obj["server"])
    if config_path is not None:
        payload = {"instance": _load_config(config_path)}
    else:
        payload = {"random": _random_payload(random_count, seed, q_card)}
    doc = _post(client, "/v1/identities", payload)
    click.echo(canonical_json(doc), nl=False)
    if not doc["all_ok"]:
        raise SystemExit(1)


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Instance config JSON.")
@click.option("--n", "n", type=int, required=True, help="Blocklength.")
@click.option("--trials", type=int, required=True, help="Monte Carlo trials.")
@click.option("--seed", "master_seed", type=int, default=0, show_default=True,
              help="Master seed; every draw derives from it.")
@click.option("--rates", "rates_text", default=None,
              metavar=",".join(RATE_KEYS),
              help="Operating point for a full encode/transmit/decode run.")
@click.option("--eps-typ", type=float, default=1.0, show_default=True,
              help="Typicality tolerance (multiplicative).")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Worker processes; the report is identical for any value.")
@click.option("--sweep-rp2c", "sweep_text", default=None, metavar="LO:HI:STEP",
              help="Instead of decoding, sweep the u2c bin-search success "
                   "rate over a grid of overhead rates.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Also write the JSON report to a file.")
@click.option("--sweep-out", "sweep_out_path", type=click.Path(dir_okay=False),
              default=None, help="Also write sweep rows as CSV.")
@click.pass_obj
def simulate(obj, config_path, n, trials, master_seed, rates_text, eps_typ,
             jobs, sweep_text, out_path, sweep_out_path):
    """Monte Carlo runs of the binning scheme on one instance."""
    if sweep_out_path and sweep_text is None:
        raise click.UsageError("--sweep-out needs --sweep-rp2c")
    client = _client(obj["server"])
    instance = _load_config(config_path)
    if sweep_text is not None:
        doc = _post(client, "/v1/simulate/sweep", {
            "instance": instance,
            "n": n,
            "rp2c_values": _parse_sweep(sweep_text),
            "trials": trials,
            "master_seed": master_seed,
            "eps_typ": eps_typ,
        })
    else:
        if rates_text is None:
            raise click.UsageError("--rates is required unless --sweep-rp2c is given")
        doc = _post(client, "/v1/simulate", {
            "instance": instance,
            "n": n,
            "rates": _parse_rates(rates_text),
            "eps_typ": eps_typ,
            "trials": trials,
            "master_seed": master_seed,
            "jobs": jobs,
        })
    text = canonical_json(doc)
    click.echo(text, nl=False)
    if out_path:
        _write_out(out_path, text)
    if sweep_out_path:
        _write_out(sweep_out_path, _sweep_csv(doc))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
