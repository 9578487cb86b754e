"""Command-line front end: one subcommand per analysis, CSV/JSON outputs and a manifest."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

try:  # pragma: no cover - runtime convenience
    from .base import CdeError, CheckReport, RunContext, RunResult, ValidationError, run_command
    from .classifier import (
        NormalFormLabel,
        classify_cde,
        find_equilibria,
        normal_form_instance,
        planar_normal_form_instance,
    )
    from .config import get_config, set_config
    from .desingularization import CdeSpec
    from .integrator import IntegrationSettings, integrate_cde
    from .jumps import (
        cusp_jump_map,
        resolve_jump,
        sample_jump_queries,
        search_finite_jump,
        swallowtail_jump_map,
    )
    from .potentials import (
        Attraction,
        CatastropheFamily,
        ChartPoint,
        FamilyTag,
        classify_membership,
        lift_to_constraint,
    )
    from .slowfast import BUILTIN_MODELS, BuiltinModel, builtin_model, convergence_study
    from .storage import OutputWriter
    from .strata import sample_catastrophe_set, stratum_of, supported_strata
except ImportError:  # pragma: no cover - executed when run as script directly
    sys.path.append(str(Path(__file__).resolve().parent.parent))
    from cdeflow.base import CdeError, CheckReport, RunContext, RunResult, ValidationError, run_command
    from cdeflow.classifier import (
        NormalFormLabel,
        classify_cde,
        find_equilibria,
        normal_form_instance,
        planar_normal_form_instance,
    )
    from cdeflow.config import get_config, set_config
    from cdeflow.desingularization import CdeSpec
    from cdeflow.integrator import IntegrationSettings, integrate_cde
    from cdeflow.jumps import (
        cusp_jump_map,
        resolve_jump,
        sample_jump_queries,
        search_finite_jump,
        swallowtail_jump_map,
    )
    from cdeflow.potentials import (
        Attraction,
        CatastropheFamily,
        ChartPoint,
        FamilyTag,
        classify_membership,
        lift_to_constraint,
    )
    from cdeflow.slowfast import BUILTIN_MODELS, BuiltinModel, builtin_model, convergence_study
    from cdeflow.storage import OutputWriter
    from cdeflow.strata import sample_catastrophe_set, stratum_of, supported_strata

logger = logging.getLogger(__name__)

COMMANDS = (
    "simulate",
    "classify",
    "jump-search",
    "eps-compare",
    "strata-sample",
    "equilibria",
    "demo",
    "portrait",
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


@dataclass(slots=True)
class RunConfig:
    """Paramètres d'une exécution du CLI."""

    command: str
    spec_path: Optional[str] = None
    family: Optional[str] = None
    start: Optional[str] = None
    horizon: Optional[float] = None
    epsilons: Optional[Sequence[float]] = None
    samples: int = 200
    output_dir: Optional[Path] = None
    seed: Optional[int] = None
    overrides: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ValidationError(f"commande inconnue {self.command!r} (connues: {', '.join(COMMANDS)})")
        if self.samples < 1:
            raise ValidationError("--samples doit être >= 1")
        if self.horizon is not None and not self.horizon > 0:
            raise ValidationError("--horizon doit être > 0")


# ---------------------------------------------------------------------------
# Input resolution
# ---------------------------------------------------------------------------


@dataclass(slots=True)
class ResolvedSpec:
    spec: CdeSpec
    source: str
    model: Optional[BuiltinModel] = None


def resolve_spec(text: Optional[str]) -> ResolvedSpec:
    """Modèle intégré, étiquette de forme normale (groupe/variante) ou fichier JSON."""
    if not text:
        raise ValidationError("--spec requis (modèle intégré, étiquette groupe/variante ou fichier JSON)")
    if text in BUILTIN_MODELS:
        model = builtin_model(text)
        return ResolvedSpec(model.spec, f"builtin:{text}", model)
    path = Path(text)
    if path.suffix == ".json" or path.exists():
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ValidationError(f"fichier de spec introuvable: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: JSON invalide (ligne {exc.lineno}): {exc.msg}") from exc
        return ResolvedSpec(CdeSpec.from_json(payload), str(path))
    if text.startswith("planar/"):
        _, group, variant = (text.split("/") + ["", ""])[:3]
        return ResolvedSpec(planar_normal_form_instance(group, variant), text)
    if "/" in text:
        return ResolvedSpec(normal_form_instance(NormalFormLabel.parse(text)), f"normal_form:{text}")
    raise ValidationError(f"--spec {text!r}: ni modèle intégré, ni étiquette, ni fichier JSON")


def parse_start(family: CatastropheFamily, text: str) -> ChartPoint:
    """``"x=1.1,a=-1.2"`` -> point de carte ; les coordonnées absentes valent 0."""
    values: Dict[str, float] = {}
    for item in filter(None, (part.strip() for part in text.split(","))):
        name, sep, raw = item.partition("=")
        if not sep:
            raise ValidationError(f"--start: élément {item!r} sans '=' (format nom=valeur)")
        try:
            values[name.strip()] = float(raw)
        except ValueError as exc:
            raise ValidationError(f"--start: valeur non numérique pour {name.strip()!r}") from exc
    return ChartPoint.from_mapping(family, values)


def _start_for(cfg: RunConfig, resolved: ResolvedSpec) -> ChartPoint:
    if cfg.start:
        return parse_start(resolved.spec.family, cfg.start)
    if resolved.model is not None:
        return resolved.model.start
    raise ValidationError(f"--start requis pour {resolved.source} (coordonnées {resolved.spec.family.chart_names})")


def _horizon_for(cfg: RunConfig, resolved: ResolvedSpec) -> float:
    if cfg.horizon is not None:
        return cfg.horizon
    if resolved.model is not None:
        return resolved.model.horizon
    return get_config().horizon


def _family_for(cfg: RunConfig) -> CatastropheFamily:
    if not cfg.family:
        raise ValidationError("--family requis")
    return CatastropheFamily.from_name(cfg.family)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

Outputs = Tuple[Dict[str, pd.DataFrame], Dict[str, Any]]


def _simulate(cfg: RunConfig, context: RunContext) -> Outputs:
    resolved = resolve_spec(cfg.spec_path)
    start = _start_for(cfg, resolved)
    horizon = _horizon_for(cfg, resolved)
    context.extra.update(spec=resolved.source, start=start.as_dict(), horizon=horizon)
    print(f"📡 Intégration de {resolved.spec.name or resolved.source} jusqu'à t = {horizon:g}...")
    trajectory = integrate_cde(resolved.spec, start, IntegrationSettings.from_config(horizon=horizon))
    final = trajectory.final_event
    print(f"   ✓ {len(trajectory.segments)} segments, fin: {final.kind.value if final else '-'}")
    payload = {
        "spec": resolved.spec.to_json(),
        "start": start.as_dict(),
        "events": trajectory.event_log(),
        "checks": trajectory.report,
    }
    return {"trajectory": trajectory.to_frame()}, {"events": payload}


def _classify(cfg: RunConfig, context: RunContext) -> Outputs:
    resolved = resolve_spec(cfg.spec_path)
    context.extra.update(spec=resolved.source)
    print(f"📡 Classification de {resolved.spec.name or resolved.source}...")
    result = classify_cde(resolved.spec)
    print(f"   ✓ Étiquette: {result.verdict}")
    payload = {**result.to_dict(), "spec": resolved.spec.to_json(), "checks": result.report}
    return {}, {"classification": payload}


def _equilibria(cfg: RunConfig, context: RunContext) -> Outputs:
    resolved = resolve_spec(cfg.spec_path)
    context.extra.update(spec=resolved.source)
    print(f"📡 Recherche des équilibres de {resolved.spec.name or resolved.source}...")
    points = find_equilibria(resolved.spec)
    print(f"   ✓ {len(points)} équilibres ({sum(p.on_singular for p in points)} sur B)")
    rows = [p.to_dict() for p in points]
    frame = pd.DataFrame(rows).drop(columns=["spectrum"], errors="ignore")
    return {"equilibria": frame}, {"equilibria": {"spec": resolved.spec.to_json(), "equilibria": rows}}


def _jump_search(cfg: RunConfig, context: RunContext) -> Outputs:
    family = _family_for(cfg)
    rng = np.random.default_rng(context.seed)
    context.extra.update(family=family.name, samples=cfg.samples)
    print(f"📡 Recherche de sauts finis: {family.name}, {cfg.samples} points de B...")
    report = CheckReport()
    rows: List[Dict[str, Any]] = []
    disagreements: List[float] = []
    incomplete = 0
    for index, query in enumerate(sample_jump_queries(family, cfg.samples, rng)):
        search = search_finite_jump(family, query)
        report.extend(_only_warnings(search.report))
        row: Dict[str, Any] = {"query": index, **{f"q_{k}": v for k, v in query.as_dict(family).items()}}
        row["n_critical"] = len(search.candidates)
        row["n_admissible"] = len(search.admissible)
        landings = [search.admissible[0].fast] if search.admissible else []
        if family.fast_dim == 1:
            row["search_x"] = float(landings[0][0]) if landings else float("nan")
            row["closed_form_x"] = _closed_form_landing(family, query)
            descent = resolve_jump(family, query)
            row["descent_x"] = float(descent.landing.fast[0]) if descent.landed else float("nan")
            row["potential_drop"] = descent.potential_drop
            values = [row["search_x"], row["closed_form_x"], row["descent_x"]]
            if all(np.isfinite(values)):
                disagreements.append(float(np.max(values) - np.min(values)))
            elif any(np.isfinite(values)):
                incomplete += 1
        rows.append(row)

    frame = pd.DataFrame(rows)
    admissible_total = int(frame["n_admissible"].sum()) if not frame.empty else 0
    summary: Dict[str, Any] = {
        "family": family.name,
        "samples": cfg.samples,
        "queries_with_jump": int((frame["n_admissible"] > 0).sum()) if not frame.empty else 0,
        "admissible_total": admissible_total,
        "max_disagreement": max(disagreements) if disagreements else None,
        "incomplete_rows": incomplete,
    }
    if family.is_umbilic:
        if admissible_total:
            report.add(f"warning: {admissible_total} sauts finis trouvés pour un ombilic")
        else:
            report.add("ok: aucun saut fini depuis les points de B échantillonnés")
    if incomplete:
        report.add(f"warning: {incomplete} points où une seule partie des trois méthodes aboutit")
    if disagreements and max(disagreements) > 1e-8:
        report.add(f"warning: désaccord {max(disagreements):.2e} entre carte fermée, énumération et descente")
    summary["checks"] = report
    print(f"   ✓ {summary['queries_with_jump']}/{cfg.samples} points avec saut admissible")
    return {"jumps": frame}, {"jump_search": summary}


def _only_warnings(report: CheckReport) -> CheckReport:
    filtered = CheckReport()
    for message in report.warnings:
        filtered.add(message)
    return filtered


def _closed_form_landing(family: CatastropheFamily, query) -> float:
    try:
        if family.tag is FamilyTag.SWALLOWTAIL:
            return float(swallowtail_jump_map(query, family.sign).fast[0])
        if family.tag is FamilyTag.CUSP:
            return float(cusp_jump_map(query, family.sign).fast[0])
    except CdeError as exc:
        logger.debug("pas de carte fermée en %s: %s", query, exc)
    return float("nan")


def _eps_compare(cfg: RunConfig, context: RunContext) -> Outputs:
    resolved = resolve_spec(cfg.spec_path)
    start = _start_for(cfg, resolved)
    horizon = _horizon_for(cfg, resolved)
    epsilons = list(cfg.epsilons or (resolved.model.epsilons if resolved.model else (1e-1, 1e-2, 1e-3)))
    context.extra.update(spec=resolved.source, start=start.as_dict(), horizon=horizon, epsilons=epsilons)
    print(f"📡 Comparaison epsilon -> 0 sur {len(epsilons)} valeurs...")
    table = convergence_study(resolved.spec, start, horizon, epsilons)
    for row in table.rows:
        print(f"   • epsilon={row.epsilon:g}: erreur {row.sup_slow_error:.3e} ({row.status})")
    frames = {"error_table": table.to_frame()}
    if table.reference is not None:
        frames["reference_trajectory"] = table.reference.to_frame()
    payload = {"monotone": table.is_monotone(), "rows": table.to_frame(), "checks": table.report}
    return frames, {"convergence": payload}


def _strata_sample(cfg: RunConfig, context: RunContext) -> Outputs:
    family = _family_for(cfg)
    rng = np.random.default_rng(context.seed)
    context.extra.update(family=family.name, samples=cfg.samples)
    print(f"📡 Échantillonnage des strates de {family.name}...")
    frame = sample_catastrophe_set(family, cfg.samples, rng)
    report = CheckReport()
    by_symbol = {str(label): label for label in supported_strata(family)}
    mismatches = 0
    for _, row in frame.iterrows():
        point = lift_to_constraint(family, ChartPoint(family, [row[n] for n in family.chart_names]))
        if stratum_of(family, point) != by_symbol[row["symbol"]]:
            mismatches += 1
    if mismatches:
        report.add(f"warning: {mismatches}/{len(frame)} points reclassés dans une autre strate")
    else:
        report.add(f"ok: {len(frame)} points reclassés dans leur strate")
    counts = frame.groupby("symbol").size().to_dict() if not frame.empty else {}
    print(f"   ✓ {len(frame)} points sur {len(counts)} strates")
    return {"catastrophe_set": frame}, {"strata": {"family": family.name, "counts": counts, "checks": report}}


def _demo(cfg: RunConfig, context: RunContext) -> Outputs:
    if cfg.spec_path not in BUILTIN_MODELS:
        raise ValidationError(f"demo: modèle intégré attendu (connus: {', '.join(BUILTIN_MODELS)})")
    frames, payloads = _simulate(cfg, context)
    more_frames, more_payloads = _equilibria(cfg, context)
    frames.update(more_frames)
    payloads.update(more_payloads)
    return frames, payloads


def _portrait(cfg: RunConfig, context: RunContext) -> Outputs:
    resolved = resolve_spec(cfg.spec_path)
    family = resolved.spec.family
    horizon = _horizon_for(cfg, resolved)
    rng = np.random.default_rng(context.seed)
    half = get_config().domain_half_width
    context.extra.update(spec=resolved.source, samples=cfg.samples, horizon=horizon)
    print(f"📡 Portrait de phase: {cfg.samples} conditions initiales dans S_V,min...")
    settings = IntegrationSettings.from_config(horizon=horizon)
    report = CheckReport()
    frames: List[pd.DataFrame] = []
    attempts = 0
    while len(frames) < cfg.samples and attempts < 50 * cfg.samples:
        attempts += 1
        chart = ChartPoint(family, rng.uniform(-0.9 * half, 0.9 * half, size=len(family.chart_names)))
        membership = classify_membership(family, lift_to_constraint(family, chart))
        if membership.attracting is not Attraction.INTERIOR:
            continue
        try:
            trajectory = integrate_cde(resolved.spec, chart, settings)
        except CdeError as exc:
            report.add(f"warning: trajectoire depuis {chart.as_dict()} abandonnée: {exc}")
            continue
        frame = trajectory.to_frame()
        frame.insert(0, "trajectory_id", len(frames))
        frames.append(frame)
    if len(frames) < cfg.samples:
        report.add(f"warning: {len(frames)}/{cfg.samples} trajectoires obtenues")
    print(f"   ✓ {len(frames)} trajectoires")
    portrait = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()
    return {"portrait": portrait}, {"portrait": {"trajectories": len(frames), "checks": report}}


COMMAND_HANDLERS: Dict[str, Callable[[RunConfig, RunContext], Outputs]] = {
    "simulate": _simulate,
    "classify": _classify,
    "jump-search": _jump_search,
    "eps-compare": _eps_compare,
    "strata-sample": _strata_sample,
    "equilibria": _equilibria,
    "demo": _demo,
    "portrait": _portrait,
}


# ---------------------------------------------------------------------------
# Checks applied to every command
# ---------------------------------------------------------------------------


def _collect_reports(frames: Dict[str, pd.DataFrame], payloads: Dict[str, Any], report: CheckReport) -> None:
    for payload in payloads.values():
        if isinstance(payload, dict) and isinstance(payload.get("checks"), CheckReport):
            report.extend(payload["checks"])


def _check_frames(frames: Dict[str, pd.DataFrame], payloads: Dict[str, Any], report: CheckReport) -> None:
    for name, frame in frames.items():
        if frame.empty:
            report.add(f"warning: table {name} vide")
            continue
        numeric = frame.select_dtypes(include="number").drop(columns=["runtime_ms"], errors="ignore")
        if numeric.isna().any().any():
            report.add(f"warning: table {name}: valeurs manquantes (NaN)")


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------


def run(cfg: RunConfig) -> int:
    """Exécute une commande ; retourne 0, 2 (validation) ou 3 (échec numérique)."""
    previous = get_config()
    writer = OutputWriter(cfg.output_dir or previous.output_dir / cfg.command)
    seed = previous.seed if cfg.seed is None else cfg.seed
    exit_code = EXIT_OK
    result: Optional[RunResult] = None
    inputs: Dict[str, Any] = {"spec": cfg.spec_path, "family": cfg.family, "overrides": dict(cfg.overrides)}
    try:
        set_config(previous.with_overrides(cfg.overrides))
        context = RunContext(command=cfg.command, output_dir=writer.output_dir, seed=seed)
        handler = COMMAND_HANDLERS[cfg.command]
        result = run_command(
            context=context,
            compute=lambda ctx: handler(cfg, ctx),
            checks=(_collect_reports, _check_frames),
        )
        inputs.update(result.metadata)
        writer.write_all(result.frames, result.payloads)
        for message in result.report.warnings:
            print(f"   ⚠️  {message}")
        print(f"\n✅ {cfg.command} terminé: {len(writer.written)} fichiers dans {writer.output_dir}")
    except CdeError as exc:
        exit_code = exc.exit_code if exc.exit_code in (EXIT_VALIDATION, EXIT_NUMERICAL) else EXIT_NUMERICAL
        print(f"\n❌ Erreur ({type(exc).__name__}): {exc}")
        logger.debug("échec de %s", cfg.command, exc_info=True)
    finally:
        writer.write_manifest(
            command=cfg.command,
            inputs=inputs,
            seed=seed,
            tolerances=get_config().tolerances(),
            exit_code=exit_code,
            checks=result.report if result is not None else None,
        )
        set_config(previous)
    return exit_code


def _parse_overrides(extra: Sequence[str]) -> Dict[str, str]:
    """``--tol.<nom>=<valeur>`` ou ``--tol.<nom> <valeur>``."""
    overrides: Dict[str, str] = {}
    items = list(extra)
    while items:
        item = items.pop(0)
        if not item.startswith("--tol."):
            raise ValidationError(f"argument inconnu {item!r}")
        name, sep, value = item[len("--tol."):].partition("=")
        if not sep:
            if not items:
                raise ValidationError(f"--tol.{name}: valeur manquante")
            value = items.pop(0)
        overrides[name] = value
    return overrides


def _epsilons(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"liste de réels attendue, reçu {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdeflow",
        description="Équations différentielles contraintes à potentiel de catastrophe",
        epilog="Tolérances: --tol.<nom>=<valeur> (ex. --tol.rel_tol=1e-9)",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("name", nargs="?", help="modèle intégré (pour demo)")
    parser.add_argument("--spec", help="modèle intégré, étiquette groupe/variante ou fichier JSON")
    parser.add_argument("--family", help="famille de catastrophe (jump-search, strata-sample)")
    parser.add_argument("--start", help='point de départ en coordonnées de carte, ex. "x=1.1,a=-1.2"')
    parser.add_argument("--horizon", type=float)
    parser.add_argument("--epsilons", type=_epsilons, help="ex. 1e-1,1e-2,1e-3")
    parser.add_argument("--samples", type=int, default=200)
    parser.add_argument("--out", type=Path, help="dossier de sortie")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--log-level", default=None)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    level = (args.log_level or get_config().log_level).upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")

    print("=" * 80)
    print(f"🚀 CDEFLOW - {args.command.upper()}")
    print("=" * 80)
    try:
        overrides = _parse_overrides(extra)
        cfg = RunConfig(
            command=args.command,
            spec_path=args.spec or args.name,
            family=args.family,
            start=args.start,
            horizon=args.horizon,
            epsilons=args.epsilons,
            samples=args.samples,
            output_dir=args.out,
            seed=args.seed,
            overrides=overrides,
        )
    except ValidationError as exc:
        print(f"\n❌ Erreur: {exc}")
        return EXIT_VALIDATION
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
