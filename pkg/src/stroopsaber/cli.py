"""Command-line entry points: beat-map generation, training plans, record
export, calibration simulation, ANOVA reports, and the HTTP service."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import analysis
from .beatmap import beatmap_to_json, default_song_catalog, generate_beatmap, load_song_manifest
from .core import Level
from .sessions import RecordStore, build_training_plan
from .simulate import calibration_report, default_population, difficulty_ordering_check


def _songs(manifest: str | None):
    return load_song_manifest(manifest) if manifest else list(default_song_catalog())


def _cmd_gen_beatmap(args: argparse.Namespace) -> int:
    songs = {s.id: s for s in _songs(args.manifest)}
    song = songs.get(args.song)
    if song is None:
        print(f"unknown song id {args.song!r}; available: {', '.join(sorted(songs))}", file=sys.stderr)
        return 2
    beatmap = generate_beatmap(song, args.level, args.mode, args.seed)
    text = beatmap_to_json(beatmap)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def _cmd_plan(args: argparse.Namespace) -> int:
    plan = build_training_plan(args.participant)
    payload = {
        "participant_id": plan.participant_id,
        "calendar_window_weeks": plan.calendar_window_weeks,
        "sessions": [
            {
                "ordinal": s.ordinal,
                "level": s.level.value,
                "song_count": s.song_count,
                "break_after": s.break_after,
            }
            for s in plan.sessions
        ],
    }
    print(json.dumps(payload, indent=2))
    return 0


def _cmd_export(args: argparse.Namespace) -> int:
    store = RecordStore(log_path=Path(args.data) / "records.ndjson")
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        store.export_csv(fh)
    print(f"wrote {len(store.all_records())} records to {args.out}")
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    population = default_population(size=args.players, seed=args.seed)
    songs = _songs(args.manifest)[: args.songs]
    levels = [Level(args.level)] if args.level else list(Level)
    songs_by_level = {level: songs for level in levels}
    report = calibration_report(population, songs_by_level, levels, seed=args.seed)
    payload = report.to_dict()
    if len(levels) == len(Level):
        payload["ordering"] = difficulty_ordering_check(population, songs_by_level, seed=args.seed).to_dict()
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    records = analysis.read_records_csv(args.input)
    try:
        report = analysis.analyze_records(records, args.design)
    except ValueError as exc:
        print(f"cannot analyze: {exc}", file=sys.stderr)
        return 2
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=args.data, timezone=os.environ.get("STROOPSABER_TZ", "UTC"))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stroopsaber")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-beatmap", help="generate a deterministic beat map")
    p.add_argument("--song", required=True)
    p.add_argument("--level", required=True, choices=[lv.value for lv in Level])
    p.add_argument("--mode", required=True, choices=["color", "word"])
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out")
    p.add_argument("--manifest", help="song manifest JSON; defaults to the built-in catalog")
    p.set_defaults(func=_cmd_gen_beatmap)

    p = sub.add_parser("plan", help="print the 20-session training plan")
    p.add_argument("--participant", required=True)
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("export", help="export all song records as CSV")
    p.add_argument("--data", required=True, help="service data directory")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("simulate", help="run the synthetic-player calibration report")
    p.add_argument("--level", choices=[lv.value for lv in Level], help="restrict to one level")
    p.add_argument("--players", type=int, default=12)
    p.add_argument("--songs", type=int, default=4)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--manifest")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("analyze", help="repeated-measures ANOVA over exported records")
    p.add_argument("--input", required=True, help="records CSV from export")
    p.add_argument("--design", required=True, choices=["oneway", "twoway"])
    p.add_argument("--out")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("serve", help="run the HTTP/realtime service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data", required=True, help="data directory for journals and logs")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
