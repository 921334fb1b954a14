"""Command-line front end: batch subcommands and an interactive shell."""
from __future__ import annotations

import argparse
import cmd
import shlex
import sys
from typing import Optional, TextIO

from .engine import Engine, parse_opspec
from .errors import QuerySyntaxError, TPietError, WorkspaceError
from .render import FORMATS, render
from .workspace import WorkspaceConfig, default_path, load_workspace, save_workspace

__all__ = ["main", "Shell", "split_statements"]

EXIT_OK, EXIT_QUERY, EXIT_WORKSPACE = 0, 1, 2


def split_statements(text: str) -> list[str]:
    """Split a script on top-level ``;``, ignoring ``--`` comments and
    semicolons inside string literals."""
    out, buf = [], []
    i, n = 0, len(text)
    in_str = False
    while i < n:
        ch = text[i]
        if in_str:
            buf.append(ch)
            if ch == "\\" and i + 1 < n:
                buf.append(text[i + 1])
                i += 1
            elif ch == '"':
                in_str = False
        elif ch == '"':
            in_str = True
            buf.append(ch)
        elif text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        elif ch == ";":
            out.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
        i += 1
    out.append("".join(buf))
    return [s.strip() for s in out if s.strip()]


def run_query(engine: Engine, text: str, fmt: str, out: TextIO, err: TextIO) -> int:
    try:
        result = engine.query(text)
    except QuerySyntaxError as e:
        print(f"syntax error:\n{e.caret(text)}", file=err)
        return EXIT_QUERY
    except TPietError as e:
        print(f"error: {e}", file=err)
        return EXIT_QUERY
    out.write(render(result, fmt))
    return EXIT_OK


def list_layers(engine: Engine) -> str:
    lines = []
    for name, layer in engine.layers.items():
        span = ", ".join(repr(i) for i in layer.lifespan()) or "empty"
        schema = ", ".join(layer.attribute_schema) or "-"
        lines.append(f"{name}: {layer.geometry_kind}, {len(layer.stages)} stages, "
                     f"attributes {schema}, lifespan {span}")
    return "\n".join(lines) + "\n" if lines else "no layers\n"


def list_dimensions(engine: Engine, name: Optional[str] = None) -> str:
    wh = engine.warehouse
    if wh is None:
        return "no warehouse\n"
    dims = [wh.dimension(name)] if name else list(wh.dimensions.values())
    lines = []
    for d in dims:
        lines.append(f"{d.name}: {' > '.join(d.levels)}")
        for level in d.levels:
            for r in d.rows:
                if r.level == level:
                    parent = f" -> {r.parent}" if r.parent else ""
                    lines.append(f"  {level}: {r.member}{parent} {r.interval}")
    return "\n".join(lines) + "\n"


def list_mapping(engine: Engine) -> str:
    wh = engine.warehouse
    if wh is None:
        return "no warehouse\n"
    lines = [f"{lk.dimension}.{lk.level} <-> {lk.layer}" for lk in wh.links]
    lines += [f"  {r.member} -> {r.layer}.{r.object_id} {r.interval}" for r in wh.alpha]
    return "\n".join(lines) + "\n"


class Shell(cmd.Cmd):
    """Interactive TPiet-QL shell. Queries end with ``;`` and may span lines;
    meta-commands start with a backslash."""

    intro = "TPiet-QL shell. End queries with ';'. \\help lists commands, \\quit exits."
    prompt = "tpiet> "

    def __init__(self, engine: Engine, cfg: Optional[WorkspaceConfig] = None, fmt: str = "table",
                 stdin=None, stdout=None, interactive: bool = True):
        super().__init__(stdin=stdin, stdout=stdout)
        self.interactive = interactive
        if not interactive:
            self.intro = None
            self.prompt = ""
        if stdin is not None:
            self.use_rawinput = False
        self.engine = engine
        self.cfg = cfg
        self.fmt = fmt
        self.buffer: list[str] = []
        self.status = EXIT_OK

    def _out(self, text: str) -> None:
        self.stdout.write(text if text.endswith("\n") else text + "\n")

    def precmd(self, line: str) -> str:
        stripped = line.strip()
        if line == "EOF":
            return line
        if self.buffer:
            return "\x00" + line
        if stripped.startswith("\\"):
            return stripped[1:]
        return "\x00" + line if stripped else line

    def emptyline(self):
        return False

    def default(self, line: str):
        if line.startswith("\x00"):
            line = line[1:]
            self.buffer.append(line)
            text = "\n".join(self.buffer)
            stmts = split_statements(text)
            if text.rstrip().endswith(";") or (not stmts and self.buffer):
                self.buffer = []
                for s in stmts:
                    self.status = run_query(self.engine, s, self.fmt, self.stdout, self.stdout)
            if self.interactive:
                self.prompt = "   ... " if self.buffer else "tpiet> "
            return False
        self._out(f"unknown command \\{line.split()[0] if line.split() else ''}; try \\help")
        return False

    def do_layers(self, arg):
        """\\layers: list layers with stage counts and lifespans."""
        self.stdout.write(list_layers(self.engine))

    def do_dims(self, arg):
        """\\dims [NAME]: list dimension levels and member rows."""
        try:
            self.stdout.write(list_dimensions(self.engine, arg.strip() or None))
        except TPietError as e:
            self._out(f"error: {e}")

    def do_mapping(self, arg):
        """\\mapping: list level/layer links and mapping rows."""
        self.stdout.write(list_mapping(self.engine))

    def do_explain(self, arg):
        """\\explain QUERY: show the evaluation plan."""
        try:
            self._out(self.engine.explain(arg.rstrip().rstrip(";")))
        except QuerySyntaxError as e:
            self._out(f"syntax error:\n{e.caret(arg)}")
        except TPietError as e:
            self._out(f"error: {e}")

    def do_now(self, arg):
        """\\now [TICK]: show or set the current tick."""
        if arg.strip():
            try:
                tick = int(arg)
                if tick < 0:
                    raise ValueError
            except ValueError:
                self._out("error: \\now takes a non-negative integer tick")
                return
            self.engine.set_now(tick)
        self._out(f"current tick: {self.engine.current_tick}")

    def do_format(self, arg):
        """\\format table|csv|geojson: choose the output format."""
        if arg.strip() not in FORMATS:
            self._out(f"error: format must be one of {', '.join(FORMATS)}")
            return
        self.fmt = arg.strip()

    def do_op(self, arg):
        """\\op OPSPEC: apply an update operation (see `tpiet op --help`)."""
        try:
            res = self.engine.apply(parse_opspec(arg))
        except TPietError as e:
            self._out(f"error: {e}")
            return
        self._out(res.describe())

    def do_save(self, arg):
        """\\save: write layers, dimensions and mappings back to the workspace files."""
        if self.cfg is None:
            self._out("error: no workspace file to save to")
            return
        for p in save_workspace(self.engine, self.cfg):
            self._out(f"wrote {p}")

    def do_help(self, arg):
        """\\help: list commands."""
        names = sorted(n[3:] for n in self.get_names() if n.startswith("do_") and n != "do_EOF")
        for n in names:
            doc = getattr(self, "do_" + n).__doc__ or ""
            self._out(doc.strip().splitlines()[0] if doc else f"\\{n}")

    def do_quit(self, arg):
        """\\quit: leave the shell."""
        return True

    def do_EOF(self, arg):
        if self.buffer:
            self.default("\x00;")
        if self.interactive:
            self.stdout.write("\n")
        return True


OPSPEC_HELP = """operation forms (quote WKT or pass it as one argument):
  create LAYER ID @T WKT [k=v ...]
  update LAYER ID @T [WKT] [k=v ...]
  delete LAYER ID @T
  reincarnate LAYER ID @T WKT [k=v ...]
  split LAYER PARENT @T ID:WKT ID:WKT ... [--rollup P | --rollup ID=P ...]
  merge LAYER ID ID ... @T NEWID[:WKT] [k=v ...] [--rollup P]
"""


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tpiet", description="Spatio-temporal SOLAP engine for TPiet-QL.")
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(sp):
        sp.add_argument("config", nargs="?", default=None,
                        help="workspace file (default: $TPIET_WORKSPACE)")
        return sp

    with_config(sub.add_parser("load", help="load a workspace and print a summary"))
    with_config(sub.add_parser("validate", help="check cross-store consistency"))
    q = with_config(sub.add_parser("query", help="run queries"))
    src = q.add_mutually_exclusive_group(required=True)
    src.add_argument("-e", "--execute", metavar="QUERY", help="query text")
    src.add_argument("-f", "--file", metavar="PATH", help="script of ';'-separated queries ('-' for stdin)")
    q.add_argument("--format", choices=FORMATS, default="table")
    q.add_argument("--explain", action="store_true", help="print the plan instead of running")
    q.add_argument("--now", type=int, metavar="TICK", help="override the current tick")
    r = with_config(sub.add_parser("repl", help="interactive shell"))
    r.add_argument("--format", choices=FORMATS, default="table")
    o = sub.add_parser("op", help="apply an update operation", epilog=OPSPEC_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    o.add_argument("config", help="workspace file")
    o.add_argument("opspec", nargs=argparse.REMAINDER, help="operation (see below)")
    o.add_argument("--no-save", action="store_true", help="apply in memory only")
    return p


def _resolve_config(path: Optional[str]) -> str:
    path = path or default_path()
    if not path:
        raise WorkspaceError("no workspace given and TPIET_WORKSPACE is not set")
    return path


def main(argv=None, stdout: TextIO = None, stderr: TextIO = None) -> int:
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        path = _resolve_config(args.config)
        engine, cfg = load_workspace(path, check=args.command != "validate")
    except WorkspaceError as e:
        print(f"workspace error: {e}", file=err)
        return EXIT_WORKSPACE

    if args.command == "load":
        out.write(engine.summary() + "\n")
        return EXIT_OK
    if args.command == "validate":
        problems = engine.validate()
        if problems:
            for pr in problems:
                print(pr, file=err)
            return EXIT_WORKSPACE
        out.write("ok\n")
        return EXIT_OK
    if args.command == "query":
        if args.now is not None:
            engine.set_now(args.now)
        if args.execute is not None:
            stmts = split_statements(args.execute) or [args.execute]
        else:
            text = sys.stdin.read() if args.file == "-" else open(args.file).read()
            stmts = split_statements(text)
        status = EXIT_OK
        for s in stmts:
            if args.explain:
                try:
                    out.write(engine.explain(s) + "\n")
                except QuerySyntaxError as e:
                    print(f"syntax error:\n{e.caret(s)}", file=err)
                    status = EXIT_QUERY
                except TPietError as e:
                    print(f"error: {e}", file=err)
                    status = EXIT_QUERY
            else:
                status = max(status, run_query(engine, s, args.format, out, err))
        return status
    if args.command == "repl":
        shell = Shell(engine, cfg, args.format, stdout=out, interactive=sys.stdin.isatty())
        shell.cmdloop()
        return EXIT_OK
    # op
    tokens = args.opspec
    if len(tokens) == 1:
        tokens = shlex.split(tokens[0])
    no_save = "--no-save" in tokens or args.no_save
    tokens = [t for t in tokens if t != "--no-save"]
    try:
        res = engine.apply(parse_opspec(tokens))
    except TPietError as e:
        print(f"error: {e}", file=err)
        return EXIT_QUERY
    out.write(res.describe() + "\n")
    if not no_save:
        for p in save_workspace(engine, cfg):
            out.write(f"wrote {p}\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
