"""Command-line front end.

Exit codes: 0 yes / realizable / true, 1 no / unrealizable / false,
2 unknown or no verdict within the bound, 3 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys

from .actions import CTR, apply_pointed, classify, executable_actions, product
from .controller import solve_controller, verify_controller_strategy
from .distributed import (
    check_hypotheses,
    is_hierarchical,
    solve_distributed,
    verify_distributed_strategy,
)
from .errors import DelgError
from .formula import parse_formula, to_text
from .models import bisim_contract, canonical_key, cell_key, evaluate, restrict_to_component
from .planning import plan_exists
from .problem import (
    instance_hash,
    load_problem,
    read_certificate,
    world_name,
    write_certificate,
    write_problem,
)
from .reductions import (
    condplan_to_controller,
    g4_to_controller,
    normalize_qbf,
    parse_condplan,
    parse_g4,
    parse_qbf,
    parse_teamdfa,
    qbf_to_controller,
    teamdfa_to_distributed,
)
from .strategy import InfoKey

EXIT_USAGE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(args, record: dict, text: str):
    if args.json:
        print(json.dumps(record, sort_keys=True, default=str))
    else:
        print(text)


def _verdict_record(v, extra=None) -> dict:
    rec = {
        "verdict": v.status.value,
        "method": v.method,
        "bound": v.bound,
        "stats": v.stats,
        "strategy": None,
    }
    if v.plan is not None:
        rec["plan"] = [str(x) for x in v.plan]
    if v.strategy is not None:
        rec["strategy"] = {"entries": len(v.strategy)}
    rec.update(extra or {})
    return rec


def _write_strategy(args, v, p, rec):
    if v.strategy is not None and args.strategy_out:
        with open(args.strategy_out, "w", encoding="utf-8") as fh:
            fh.write(write_certificate(v.strategy, p))
        rec["strategy"]["file"] = args.strategy_out


def _option(p, args, name, default=None, cast=str):
    val = getattr(args, name, None)
    if val is not None:
        return val
    if name in p.options:
        return cast(p.options[name])
    return default


def _require(p, what):
    if p.actions is None:
        raise UsageError("the problem has no actions block")
    if what == "goal" and p.goal is None:
        raise UsageError("the problem has no goal")


# --------------------------------------------------------------------------
# subcommands


def cmd_check(args):
    p = load_problem(args.file)
    f = parse_formula(args.formula, p.agents or None, "--formula")
    pm = p.pm.repoint(args.world) if args.world else p.pm
    ok = evaluate(pm, f)
    _emit(args, {"formula": to_text(f), "world": world_name(pm.point), "value": ok},
          "true" if ok else "false")
    return 0 if ok else 1


def cmd_product(args):
    p = load_problem(args.file)
    _require(p, "actions")
    m = restrict_to_component(p.pm).model
    rows = [(0, len(m.worlds), len(bisim_contract(restrict_to_component(p.pm)).model.worlds))]
    for n in range(1, args.steps + 1):
        m = product(m, p.actions)
        if not m.worlds:
            rows.append((n, 0, 0))
            break
        pm = type(p.pm)(m, m.worlds[0])
        rows.append((n, len(m.worlds), len(bisim_contract(pm).model.worlds)))
    rec = {"steps": [{"n": n, "worlds": w, "contracted": c} for n, w, c in rows]}
    text = "\n".join(f"step {n}: {w} worlds ({c} after contraction)" for n, w, c in rows)
    if args.show and m.worlds:
        lines = []
        for i, w in enumerate(m.worlds):
            lines.append(f"  {world_name(w)}: {{{' '.join(sorted(m.vals[i]))}}}")
        text += "\n" + "\n".join(lines)
        rec["worlds"] = [world_name(w) for w in m.worlds]
    _emit(args, rec, text)
    return 0


def cmd_classify(args):
    p = load_problem(args.file)
    _require(p, "actions")
    ignore = p.turn.atoms() if p.turn is not None else ()
    cls = classify(p.actions, p.action_point, agents=p.agents, ignore_atoms=ignore)
    rec = {
        "propositional": cls.propositional,
        "s5": cls.s5,
        "public_action": cls.public_action,
        "public_announcement": cls.public_announcement,
        "separable": cls.separable,
        "all_public": cls.all_public,
        "all_announcements": cls.all_announcements,
        "non_expanding": cls.non_expanding,
    }
    _emit(args, rec, "\n".join(f"{k}: {v}" for k, v in rec.items()))
    return 0


def cmd_plan(args):
    p = load_problem(args.file)
    _require(p, "goal")
    v = plan_exists(p.pm, p.actions, p.goal, bound=args.bound)
    text = v.status.value
    if v.plan is not None:
        text += "\nplan: " + " ".join(str(x) for x in v.plan)
    _emit(args, _verdict_record(v), text)
    return v.status.exit_code


def cmd_controller(args):
    p = load_problem(args.file)
    _require(p, "goal")
    method = _option(p, args, "method", "auto")
    deadlock = _option(p, args, "deadlock", "lose")
    kw = {}
    for name in ("rounds", "horizon"):
        val = _option(p, args, name, None, int)
        if val is not None:
            kw[name] = val
    v = solve_controller(p.pm, p.actions, p.goal, method, deadlock, **kw)
    rec = _verdict_record(v)
    _write_strategy(args, v, p, rec)
    _emit(args, rec, f"{v.status.value} ({v.method})")
    return v.status.exit_code


def cmd_distributed(args):
    p = load_problem(args.file)
    _require(p, "goal")
    if p.turn is None or p.split is None:
        raise UsageError("distributed mode needs a turnvar and a team declaration")
    method = _option(p, args, "method", "auto")
    deadlock = _option(p, args, "deadlock", "lose")
    horizon = _option(p, args, "horizon", None, int)
    v = solve_distributed(p.pm, p.actions, p.split, p.goal, p.turn, method, deadlock, horizon)
    extra = {}
    text = f"{v.status.value} ({v.method})"
    if args.hierarchy:
        h = is_hierarchical(p.pm, p.actions, p.split)
        extra["hierarchy"] = {"hierarchical": h.hierarchical, "order": list(h.order),
                              "witness": list(h.witness or ())}
        text += "\n" + _hierarchy_text(h)
    rec = _verdict_record(v, extra)
    _write_strategy(args, v, p, rec)
    _emit(args, rec, text)
    return v.status.exit_code


def _hierarchy_text(h):
    if h.hierarchical:
        return "hierarchical: " + " <= ".join(h.order)
    return f"not hierarchical: {h.witness[0]} and {h.witness[1]} are incomparable"


def cmd_hyps(args):
    p = load_problem(args.file)
    _require(p, "actions")
    if p.turn is None:
        raise UsageError("hypotheses need a turn variable")
    rep = check_hypotheses(p.pm, p.actions, p.turn, horizon=args.horizon)
    rec = rep.as_dict()
    lines = [f"{k}: {r.status}" + (f" ({r.witness})" if r.witness else "") for k, r in rep.items()]
    if args.hierarchy:
        if p.split is None:
            raise UsageError("the hierarchy check needs a team declaration")
        h = is_hierarchical(p.pm, p.actions, p.split)
        rec["hierarchy"] = {"hierarchical": h.hierarchical, "order": list(h.order),
                            "witness": list(h.witness or ())}
        lines.append(_hierarchy_text(h))
    _emit(args, rec, "\n".join(lines))
    statuses = {r.status for _, r in rep.items()}
    if "fail" in statuses:
        return 1
    return 0 if statuses == {"pass"} else 2


def cmd_reduce(args):
    with open(args.input, encoding="utf-8") as fh:
        text = fh.read()
    if args.kind == "qbf":
        p = qbf_to_controller(normalize_qbf(parse_qbf(text)))
    elif args.kind == "g4":
        p = g4_to_controller(parse_g4(text))
    elif args.kind == "condplan":
        p = condplan_to_controller(*parse_condplan(text))
    else:
        p = teamdfa_to_distributed(parse_teamdfa(text), "binary" if args.bits else "onehot")
    out = write_problem(p)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return 0


def _load_certificate(p, path):
    with open(path, encoding="utf-8") as fh:
        h, s = read_certificate(fh.read())
    if h != instance_hash(p):
        raise UsageError("certificate was issued for a different instance")
    return s


def cmd_verify(args):
    p = load_problem(args.file)
    _require(p, "goal")
    s = _load_certificate(p, args.strategy)
    if p.mode == "distributed" or hasattr(s, "per_agent"):
        c = verify_distributed_strategy(p.pm, p.actions, p.split, p.goal, s, p.turn, args.fuel)
    else:
        c = verify_controller_strategy(p.pm, p.actions, p.goal, s, args.fuel)
    rec = {"valid": c.ok, "reason": c.reason, "trace": [world_name(x) for x in c.trace]}
    text = "valid" if c.ok else f"invalid: {c.reason}"
    if c.trace:
        text += "\ntrace: " + " ".join(world_name(x) for x in c.trace)
    _emit(args, rec, text)
    if c.ok:
        return 0
    return 1 if c.exact else 2


# --------------------------------------------------------------------------
# interactive replay


def _ask(prompt, options, stream):
    options = [str(x) for x in options]
    while True:
        print(f"{prompt} [{' '.join(options)}]: ", end="", flush=True)
        line = stream.readline()
        if not line:
            raise UsageError("input ended during play")
        choice = line.strip()
        if choice in options:
            return choice
        print(f"not a legal move: {choice!r}")


def cmd_play(args):
    p = load_problem(args.file)
    _require(p, "goal")
    s = _load_certificate(p, args.strategy)
    stream = sys.stdin
    cur = p.pm
    if hasattr(s, "per_agent"):
        if s.method == "tree":
            raise UsageError("play supports fig4 and fig5 certificates")
        step = _play_distributed_step(p, s)
    else:
        if s.kind != "pointed":
            raise UsageError("play supports pointed controller certificates")
        step = _play_controller_step(p, s)
    clock = 0
    for _ in range(args.max_steps):
        if evaluate(cur, p.goal):
            print("goal reached")
            return 0
        x = step(cur, clock, stream)
        if x is None:
            print("no move available: the goal was not reached")
            return 1
        print(f"move {clock}: {x}")
        cur = apply_pointed(cur, p.actions, x)
        clock += 1
    print(f"stopped after {args.max_steps} moves")
    return 2


def _play_controller_step(p, s):
    a = p.actions
    ctr = [x for x in a.actions if a.owner[x] == CTR]
    env = [x for x in a.actions if a.owner[x] != CTR]

    def step(cur, clock, stream):
        side = clock % 2
        key_clock = clock if s.clock == "round" else side
        if side == 0:
            x = s.lookup((canonical_key(cur), key_clock))
            if x is None:
                raise UsageError("certificate has no entry for the current configuration")
            return x
        moves = executable_actions(cur, a, env)
        return _ask("Environment", moves, stream) if moves else None

    return step


def _play_distributed_step(p, s):
    a = p.actions

    def step(cur, clock, stream):
        m = cur.model
        x = p.turn.value_in(m.vals[cur.index])
        moves = [y for y in a.actions if a.owner[y] == x and evaluate(cur, a.pre[y])]
        if p.split.is_existential(x):
            key = InfoKey(cell_key(m, m.succ(x)[cur.index]), clock if s.method == "fig4" else None)
            y = s.lookup(x, key)
            if y is None:
                raise UsageError(f"certificate has no entry for {x} here")
            return y
        return _ask(x, moves, stream) if moves else None

    return step


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="delg", description="Reachability games on dynamic epistemic models")
    ap.add_argument("--json", action="store_true", help="print a JSON result record")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def cmd(name, fn, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(fn=fn)
        sp.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
        return sp

    sp = cmd("check", cmd_check, "evaluate a formula at the point")
    sp.add_argument("file")
    sp.add_argument("--formula", required=True)
    sp.add_argument("--world", help="evaluate here instead of at the point")

    sp = cmd("product", cmd_product, "statistics of iterated products")
    sp.add_argument("file")
    sp.add_argument("--steps", type=int, default=1)
    sp.add_argument("--show", action="store_true", help="print the last model")

    sp = cmd("classify", cmd_classify, "classify the action model")
    sp.add_argument("file")

    sp = cmd("plan", cmd_plan, "plan existence")
    sp.add_argument("file")
    sp.add_argument("--bound", type=int)

    sp = cmd("controller", cmd_controller, "controller synthesis")
    sp.add_argument("file")
    sp.add_argument("--method", choices=["auto", "fig2", "fig3", "arena", "bounded"])
    sp.add_argument("--deadlock", choices=["lose", "vacuous"])
    sp.add_argument("--rounds", type=int)
    sp.add_argument("--horizon", type=int)
    sp.add_argument("--strategy-out")

    sp = cmd("distributed", cmd_distributed, "distributed strategy synthesis")
    sp.add_argument("file")
    sp.add_argument("--method", choices=["auto", "fig4", "fig5", "tree"])
    sp.add_argument("--deadlock", choices=["lose", "vacuous"])
    sp.add_argument("--horizon", type=int)
    sp.add_argument("--hierarchy", action="store_true")
    sp.add_argument("--strategy-out")

    sp = cmd("hyps", cmd_hyps, "check the hypotheses of distributed synthesis")
    sp.add_argument("file")
    sp.add_argument("--horizon", type=int, default=8)
    sp.add_argument("--hierarchy", action="store_true")

    sp = cmd("reduce", cmd_reduce, "encode a QBF, G4, conditional planning or TEAM DFA instance")
    sp.add_argument("kind", choices=["qbf", "g4", "condplan", "teamdfa"])
    sp.add_argument("input")
    sp.add_argument("-o", "--output")
    sp.add_argument("--bits", action="store_true", help="binary encoding of DFA states")

    sp = cmd("verify", cmd_verify, "check a strategy certificate")
    sp.add_argument("file")
    sp.add_argument("--strategy", required=True)
    sp.add_argument("--fuel", type=int)

    sp = cmd("play", cmd_play, "play against a strategy certificate")
    sp.add_argument("file")
    sp.add_argument("--strategy", required=True)
    sp.add_argument("--max-steps", type=int, default=100)
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (DelgError, UsageError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
    return EXIT_USAGE


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
