#!/usr/bin/env python3
"""Writes leader.magpi: three symmetric participants, no reliable pairs.

Each role X has five equations: F (follower), C (candidate, requesting
votes), Cx (candidate, waiting), L (leader, heartbeats) and Lx (leader,
waiting). Processes mirror the equations one to one.
"""

ROLES = ["p", "q", "r"]


def others(x):
    i = ROLES.index(x)
    return ROLES[i + 1:] + ROLES[:i]


def reply_arms(x, stay):
    """hb/rv requests: answering positively falls back to F."""
    a, b = others(x)
    arms = []
    for ask, yes, no in (("hb", "ok", "ko"), ("rv", "yes", "no")):
        for o in (a, b):
            arms.append((o, ask, [(o, yes, f"F_{x}"), (o, no, stay)]))
    return arms


def plain_arms(x, labels_to):
    a, b = others(x)
    return [(o, l, target) for l, target in labels_to for o in (a, b)]


def equations(x):
    a, b = others(x)
    f, c, cx, l, lx = (f"{n}_{x}" for n in ("F", "C", "Cx", "L", "Lx"))
    return {
        f: ("branch", reply_arms(x, f), plain_arms(x, [(m, f) for m in ("yes", "no", "ok", "ko")]), c),
        c: ("sends", [(a, "rv"), (b, "rv")], cx),
        cx: ("branch", reply_arms(x, cx),
             plain_arms(x, [(m, cx) for m in ("no", "ok", "ko")] + [("yes", l)]), c),
        l: ("sends", [(a, "hb"), (b, "hb")], lx),
        lx: ("branch", reply_arms(x, lx), plain_arms(x, [(m, lx) for m in ("yes", "no", "ok", "ko")]), l),
    }


def type_text(eq):
    if eq[0] == "sends":
        _, sends, then = eq
        return "".join(f"{o}!{m}()." for o, m in sends) + then
    _, replies, plain, timeout = eq
    lines = []
    for o, m, choices in replies:
        sel = ", ".join(f"{oo}!{mm}().{t}" for oo, mm, t in choices)
        lines.append(f"{o}?{m}().+{{{sel}}}")
    lines += [f"{o}?{m}().{t}" for o, m, t in plain]
    lines.append(f"timeout.{timeout}")
    return "&{\n    " + ",\n    ".join(lines) + "\n  }"


def proc_text(eq):
    if eq[0] == "sends":
        _, sends, then = eq
        return "".join(f"c!{o}.{m}()." for o, m in sends) + f"P{then}(c)"
    _, replies, plain, timeout = eq
    lines = []
    for o, m, choices in replies:
        alts = " + ".join(f"c!{oo}.{mm}().P{t}(c)" for oo, mm, t in choices)
        lines.append(f"{o}?{m}().({alts})")
    lines += [f"{o}?{m}().P{t}(c)" for o, m, t in plain]
    lines.append(f"timeout.P{timeout}(c)")
    return "c & {\n    " + ",\n    ".join(lines) + "\n  }"


def main():
    out = [
        "// Three-node leader election; every link may fail.",
        "// Generated by gen_leader.py.",
        "protocol Leader",
        "",
        "roles " + ", ".join(ROLES),
        "",
    ]
    for x in ROLES:
        for name, eq in equations(x).items():
            out.append(f"type {name} @ {x} =\n  {type_text(eq)}\n")
    for x in ROLES:
        for name, eq in equations(x).items():
            out.append(f"proc P{name}(c: {name}) =\n  {proc_text(eq)}\n")
    binding = ", ".join(f"{x}: F_{x}" for x in ROLES)
    calls = "\n  | ".join(f"PF_{x}(s[{x}])" for x in ROLES)
    out.append(f"system\n  new s : {{{binding}}} in\n    {calls}\n  | s:[]\n")
    with open("leader.magpi", "w") as fh:
        fh.write("\n".join(out))


if __name__ == "__main__":
    main()
