"""CPLEX LP-format writer and a small reader for the subset it writes."""
import math
import re
from dataclasses import dataclass, field

from ..errors import ParseError

LINE_WIDTH = 250


def _num(x):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def _terms(pairs):
    out = []
    for k, (name, coef) in enumerate(pairs):
        sign = "-" if coef < 0 else "+"
        mag = _num(abs(coef))
        if k == 0:
            out.append(f"{'-' if coef < 0 else ''}{mag} {name}")
        else:
            out.append(f"{sign} {mag} {name}")
    return out


def _wrap(head, tokens, tail=""):
    lines = []
    line = head
    for tok in tokens + ([tail] if tail else []):
        if len(line) + 1 + len(tok) > LINE_WIDTH and line.strip():
            lines.append(line)
            line = "   "
        line = f"{line} {tok}" if line else tok
    lines.append(line)
    return lines


def format_lp(model):
    """LP-format text of the model; deterministic for a given model."""
    names = model.names
    lines = [f"\\ alpha {_num(model.alpha)} beta {_num(model.beta)} copies {model.copies}", "Minimize"]
    obj = [(names[k], c) for k, c in enumerate(model.obj) if c != 0]
    if not obj:
        obj = [(names[0], 0.0)]
    lines += _wrap(" obj:", _terms(obj))
    lines.append("Subject To")
    for row in model.rows:
        pairs = [(names[c], a) for c, a in zip(row.cols, row.coefs)]
        lines += _wrap(f" {row.name}:", _terms(pairs), f"{row.sense} {_num(row.rhs)}")
    lines.append("Bounds")
    for k, name in enumerate(names):
        if model.integer[k] and model.lb[k] == 0 and model.ub[k] == 1:
            continue
        lines.append(f" {_num(model.lb[k])} <= {name} <= {_num(model.ub[k])}")
    binaries = [n for k, n in enumerate(names) if model.integer[k] and model.lb[k] == 0 and model.ub[k] == 1]
    generals = [n for k, n in enumerate(names)
                if model.integer[k] and not (model.lb[k] == 0 and model.ub[k] == 1)]
    if binaries:
        lines.append("Binaries")
        lines += _wrap("", binaries)
    if generals:
        lines.append("Generals")
        lines += _wrap("", generals)
    lines.append("End")
    return "\n".join(lines) + "\n"


def export_lp(model, path):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_lp(model))


@dataclass
class LpProblem:
    objective: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)      # (name, {var: coef}, sense, rhs)
    bounds: dict = field(default_factory=dict)    # var -> (lb, ub)
    binaries: list = field(default_factory=list)
    generals: list = field(default_factory=list)

    @property
    def variables(self):
        seen = dict.fromkeys(self.objective)
        for _, coefs, _, _ in self.rows:
            seen.update(dict.fromkeys(coefs))
        seen.update(dict.fromkeys(self.bounds))
        seen.update(dict.fromkeys(self.binaries))
        seen.update(dict.fromkeys(self.generals))
        return list(seen)


_TOKEN = re.compile(r"\s*([+-]?)\s*(?:((?:[0-9][0-9.eE+-]*)|inf)\s+)?([A-Za-z_][A-Za-z0-9_.]*)")
_SECTIONS = {"minimize": "obj", "subject to": "rows", "bounds": "bounds", "binaries": "bin",
             "binary": "bin", "generals": "gen", "general": "gen", "end": "end"}


def _linear(expr, lineno):
    coefs = {}
    pos = 0
    expr = expr.strip()
    while pos < len(expr):
        m = _TOKEN.match(expr, pos)
        if not m or m.end() == pos:
            raise ParseError(f"cannot read linear term near '{expr[pos:pos + 20]}'", line=lineno)
        sign, num, name = m.groups()
        c = float(num) if num else 1.0
        coefs[name] = coefs.get(name, 0.0) + (-c if sign == "-" else c)
        pos = m.end()
        while pos < len(expr) and expr[pos] == " ":
            pos += 1
    return coefs


def parse_lp(text):
    """Read LP text as written by format_lp (one objective, linear rows, bounds, integrality)."""
    prob = LpProblem()
    section = None
    stmts = []   # (section, text, first line number)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("\\", 1)[0].rstrip()
        if not line.strip():
            continue
        key = line.strip().lower()
        if key in _SECTIONS:
            section = _SECTIONS[key]
            continue
        if section is None:
            raise ParseError("content before the objective section", line=lineno)
        if line.startswith("   ") and stmts and section in ("obj", "rows", "bin", "gen"):
            sec, body, start = stmts[-1]
            stmts[-1] = (sec, body + " " + line.strip(), start)
        else:
            stmts.append((section, line.strip(), lineno))
    for sec, body, lineno in stmts:
        if sec == "obj":
            _, _, expr = body.partition(":")
            prob.objective = _linear(expr, lineno)
        elif sec == "rows":
            name, _, rest = body.partition(":")
            m = re.match(r"(.*?)\s*(<=|>=|=)\s*(\S+)$", rest)
            if not m:
                raise ParseError(f"constraint '{name}' lacks a sense and right-hand side", line=lineno)
            prob.rows.append((name.strip(), _linear(m.group(1), lineno), m.group(2), float(m.group(3))))
        elif sec == "bounds":
            m = re.match(r"(\S+)\s*<=\s*(\S+)\s*<=\s*(\S+)$", body)
            if not m:
                raise ParseError(f"unsupported bound '{body}'", line=lineno)
            prob.bounds[m.group(2)] = (float(m.group(1)), float(m.group(3)))
        elif sec == "bin":
            prob.binaries += body.split()
        elif sec == "gen":
            prob.generals += body.split()
        elif sec == "end":
            break
    return prob


def read_lp(path):
    with open(path, encoding="ascii") as fh:
        return parse_lp(fh.read())
