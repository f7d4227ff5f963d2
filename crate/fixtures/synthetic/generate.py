#!/usr/bin/env python3
"""Writes the synthetic corpus: 24 classes built from six templates, one
suite per class plus a few tests that span two classes.

Expected values are computed here in plain Python, independently of the
interpreter. Writes next to this script, or under the directory given as
the first argument. Output is deterministic; rerun after editing and regenerate
the manifest with `mutagoal manifest fixtures/synthetic`.
"""

import os
import shutil
import sys

HERE = os.path.dirname(os.path.abspath(__file__))

NAMES = [
    ["Wallet", "Tally", "Meter", "Quota"],
    ["Range", "Band", "Window", "Corridor"],
    ["Series", "Pump", "Ramp", "Sweep"],
    ["Cycle", "Dial", "Rotor", "Phase"],
    ["Buffer", "Queue", "Slot", "Bin"],
    ["Point", "Cursor", "Marker", "Probe"],
]


def accumulator(name, k):
    limit = 10 * (k % 5 + 2)
    src = f"""class {name} {{
    field total = 0
    field limit = {limit}

    method add(n) {{
        if n > 0 and self.total + n <= self.limit {{
            self.total := self.total + n
        }}
    }}

    method sub(n) {{
        if n > 0 {{
            self.total := self.total - n
        }}
    }}

    method scale(f) {{
        self.total := self.total * f
    }}

    method addAll(a, b, c) {{
        if a >= 0 and b >= 0 and c >= 0 {{
            self.total := self.total + a + b * 2 - c
        }}
    }}

    method value() returns {{
        return self.total
    }}

    method isFull() returns {{
        return self.total >= self.limit
    }}
}}
"""
    tests = [
        ("testAdd", ["a := new {C}()", "a.add(5)", "assertEqual(a.value(), 5)"]),
        (
            "testAddOverLimit",
            [
                "a := new {C}()",
                f"a.add({limit})",
                "a.add(1)",
                f"assertEqual(a.value(), {limit})",
                "assertTrue(a.isFull())",
            ],
        ),
        (
            "testSub",
            [
                "a := new {C}()",
                "a.add(7)",
                "a.sub(3)",
                "assertEqual(a.value(), 4)",
                "a.sub(0)",
                "assertEqual(a.value(), 4)",
            ],
        ),
        ("testScale", ["a := new {C}()", "a.add(3)", "a.scale(4)", "assertEqual(a.value(), 12)"]),
        ("testEmpty", ["a := new {C}()", "assertFalse(a.isFull())", "assertEqual(a.value(), 0)"]),
        ("testAddAll", ["a := new {C}()", "a.addAll(1, 2, 3)", "assertEqual(a.value(), 2)"]),
        ("testAddAllNegative", ["a := new {C}()", "a.addAll(1, -1, 0)", "assertEqual(a.value(), 0)"]),
    ]
    return src, tests


def clamp(name, k):
    lo = k % 3
    hi = lo + 10 + k % 7
    width = hi - lo
    src = f"""class {name} {{
    field lo = {lo}
    field hi = {hi}

    method widen(d) {{
        if d > 0 {{
            self.lo := self.lo - d
            self.hi := self.hi + d
        }}
    }}

    method shift(d) {{
        self.lo := self.lo + d
        self.hi := self.hi + d
    }}

    method clamp(x) returns {{
        if x < self.lo {{
            return self.lo
        }}
        if x > self.hi {{
            return self.hi
        }}
        return x
    }}

    method squeeze(d) {{
        if d > 0 and self.hi - self.lo > 2 * d {{
            self.lo := self.lo + d
            self.hi := self.hi - d
        }}
    }}

    method contains(x) returns {{
        return x >= self.lo and x <= self.hi
    }}

    method width() returns {{
        return self.hi - self.lo
    }}
}}
"""
    tests = [
        ("testWiden", ["c := new {C}()", "c.widen(2)", f"assertEqual(c.width(), {width + 4})"]),
        ("testShift", ["c := new {C}()", "c.shift(5)", f"assertEqual(c.clamp(0), {lo + 5})"]),
        ("testClampLow", ["c := new {C}()", f"assertEqual(c.clamp({lo - 3}), {lo})"]),
        (
            "testClampHigh",
            [
                "c := new {C}()",
                f"assertEqual(c.clamp({hi + 1}), {hi})",
                f"assertEqual(c.clamp({hi}), {hi})",
                f"assertEqual(c.clamp({lo + 1}), {lo + 1})",
            ],
        ),
        ("testWidenNegative", ["c := new {C}()", "c.widen(-1)", f"assertEqual(c.width(), {width})"]),
        (
            "testSqueeze",
            [
                "c := new {C}()",
                "c.squeeze(2)",
                f"assertEqual(c.width(), {width - 4})",
                f"assertTrue(c.contains({lo + 2}))",
                f"assertFalse(c.contains({lo + 1}))",
            ],
        ),
        ("testSqueezeTooFar", ["c := new {C}()", f"c.squeeze({width // 2 + 1})", f"assertEqual(c.width(), {width})"]),
    ]
    return src, tests


def series(name, k):
    step = k % 4 + 1
    src = f"""class {name} {{
    field sum = 0
    field step = {step}

    method sumTo(n) {{
        i := 0
        while i < n {{
            self.sum := self.sum + i * self.step
            i := i + 1
        }}
    }}

    method sumSquares(n) {{
        i := 1
        while i <= n {{
            self.sum := self.sum + i * i
            i := i + 1
        }}
    }}

    method clear() {{
        self.sum := 0
    }}

    method total() returns {{
        return self.sum
    }}

    method average(n) returns {{
        if n == 0 {{
            return 0
        }}
        return self.sum / n
    }}
}}
"""

    def tri(n):
        return step * sum(range(n))

    tests = [
        ("testSumTo", ["s := new {C}()", "s.sumTo(4)", f"assertEqual(s.total(), {tri(4)})"]),
        ("testSumZero", ["s := new {C}()", "s.sumTo(0)", "assertEqual(s.total(), 0)"]),
        ("testClear", ["s := new {C}()", "s.sumTo(3)", "s.clear()", "assertEqual(s.total(), 0)"]),
        (
            "testAverage",
            [
                "s := new {C}()",
                "s.sumTo(5)",
                f"assertEqual(s.average(5), {tri(5) // 5})",
                "assertEqual(s.average(0), 0)",
            ],
        ),
        ("testTwice", ["s := new {C}()", "s.sumTo(2)", "s.sumTo(3)", f"assertEqual(s.total(), {tri(2) + tri(3)})"]),
        ("testSumSquares", ["s := new {C}()", "s.sumSquares(3)", "assertEqual(s.total(), 14)"]),
    ]
    return src, tests


def cycle(name, k):
    period = k % 3 + 3
    src = f"""class {name} {{
    field state = 0
    field period = {period}

    method next() {{
        if self.state + 1 == self.period {{
            self.state := 0
        }} else {{
            self.state := self.state + 1
        }}
    }}

    method advance(n) {{
        j := 0
        while j < n {{
            self.next()
            j := j + 1
        }}
    }}

    method reset() {{
        self.state := 0
    }}

    method current() returns {{
        return self.state
    }}

    method atStart() returns {{
        return self.state == 0
    }}
}}
"""
    tests = [
        ("testNext", ["c := new {C}()", "c.next()", "assertEqual(c.current(), 1)"]),
        ("testWrap", ["c := new {C}()"] + ["c.next()"] * period + ["assertTrue(c.atStart())"]),
        ("testReset", ["c := new {C}()", "c.next()", "c.next()", "c.reset()", "assertEqual(c.current(), 0)"]),
        ("testFresh", ["c := new {C}()", "assertTrue(c.atStart())"]),
        (
            "testPartial",
            ["c := new {C}()"]
            + ["c.next()"] * (period - 1)
            + [f"assertEqual(c.current(), {period - 1})", "assertFalse(c.atStart())"],
        ),
        ("testAdvance", ["c := new {C}()", f"c.advance({period + 1})", "assertEqual(c.current(), 1)"]),
    ]
    return src, tests


def buffer(name, k):
    cap = k % 4 + 2
    src = f"""class {name} {{
    field size = 0
    field capacity = {cap}

    method push() returns {{
        if self.size < self.capacity {{
            self.size := self.size + 1
            return true
        }}
        return false
    }}

    method pop() returns {{
        if self.size > 0 {{
            self.size := self.size - 1
            return true
        }}
        return false
    }}

    method drain() returns {{
        n := 0
        while self.size > 0 {{
            self.size := self.size - 1
            n := n + 1
        }}
        return n
    }}

    method count() returns {{
        return self.size
    }}

    method isEmpty() returns {{
        return self.size == 0
    }}
}}
"""
    tests = [
        ("testPush", ["b := new {C}()", "ok := b.push()", "assertTrue(ok)", "assertEqual(b.count(), 1)"]),
        (
            "testPushFull",
            ["b := new {C}()"]
            + ["b.push()"] * cap
            + ["ok := b.push()", "assertFalse(ok)", f"assertEqual(b.count(), {cap})"],
        ),
        ("testPop", ["b := new {C}()", "b.push()", "ok := b.pop()", "assertTrue(ok)", "assertTrue(b.isEmpty())"]),
        ("testPopEmpty", ["b := new {C}()", "ok := b.pop()", "assertFalse(ok)", "assertEqual(b.count(), 0)"]),
        ("testEmpty", ["b := new {C}()", "assertTrue(b.isEmpty())"]),
        ("testDrain", ["b := new {C}()", "b.push()", "b.push()", "n := b.drain()", "assertEqual(n, 2)", "assertTrue(b.isEmpty())"]),
    ]
    return src, tests


def point(name, k):
    x, y = k % 5, k % 3
    src = f"""class {name} {{
    field x = {x}
    field y = {y}

    method move(dx, dy) {{
        self.x := self.x + dx
        self.y := self.y + dy
    }}

    method scale(f) {{
        if f != 0 {{
            self.x := self.x * f
            self.y := self.y * f
        }}
    }}

    method manhattan() returns {{
        ax := self.x
        if ax < 0 {{
            ax := 0 - ax
        }}
        ay := self.y
        if ay < 0 {{
            ay := 0 - ay
        }}
        return ax + ay
    }}

    method stepToward(tx) {{
        if self.x < tx {{
            self.x := self.x + 1
        }} else if self.x > tx {{
            self.x := self.x - 1
        }}
    }}

    method dot(ox, oy) returns {{
        return self.x * ox + self.y * oy
    }}

    method getX() returns {{
        return self.x
    }}
}}
"""
    tests = [
        (
            "testMove",
            [
                "p := new {C}()",
                "p.move(2, 3)",
                f"assertEqual(p.getX(), {x + 2})",
                f"assertEqual(p.manhattan(), {abs(x + 2) + abs(y + 3)})",
            ],
        ),
        ("testMoveNegative", ["p := new {C}()", "p.move(-10, -10)", f"assertEqual(p.manhattan(), {abs(x - 10) + abs(y - 10)})"]),
        ("testScale", ["p := new {C}()", "p.scale(3)", f"assertEqual(p.manhattan(), {3 * (x + y)})"]),
        ("testScaleZero", ["p := new {C}()", "p.scale(0)", f"assertEqual(p.getX(), {x})"]),
        ("testOrigin", ["p := new {C}()", f"assertEqual(p.manhattan(), {x + y})"]),
        (
            "testStepToward",
            [
                "p := new {C}()",
                f"p.stepToward({x + 3})",
                f"assertEqual(p.getX(), {x + 1})",
                "p.stepToward(-5)",
                f"assertEqual(p.getX(), {x})",
                f"p.stepToward({x})",
                f"assertEqual(p.getX(), {x})",
            ],
        ),
        ("testDot", ["p := new {C}()", f"assertEqual(p.dot(2, 3), {2 * x + 3 * y})"]),
    ]
    return src, tests


TEMPLATES = [accumulator, clamp, series, cycle, buffer, point]


def render_suite(suite, tests):
    out = [f"suite {suite} {{"]
    for i, (name, body) in enumerate(tests):
        if i:
            out.append("")
        out.append(f"    test {name} {{")
        out.extend(f"        {line}" for line in body)
        out.append("    }")
    out.append("}")
    return "\n".join(out) + "\n"


def main():
    root = sys.argv[1] if len(sys.argv) > 1 else HERE
    for sub in ("src", "tests"):
        path = os.path.join(root, sub)
        shutil.rmtree(path, ignore_errors=True)
        os.makedirs(path)
    k = 0
    for group in range(4):
        for t, template in enumerate(TEMPLATES):
            name = NAMES[t][group]
            src, tests = template(name, k)
            tests = [(n, [line.replace("{C}", name) for line in body]) for n, body in tests]
            if template is point:
                # a test spanning this class and the buffer declared just before it
                other = NAMES[4][group]
                tests.append(
                    (
                        f"testWith{other}",
                        [
                            f"p := new {name}()",
                            f"b := new {other}()",
                            "b.push()",
                            "p.move(1, 0)",
                            "assertEqual(b.count(), 1)",
                            f"assertEqual(p.getX(), {k % 5 + 1})",
                        ],
                    )
                )
            with open(os.path.join(root, "src", f"{name}.mini"), "w") as f:
                f.write(src)
            with open(os.path.join(root, "tests", f"{name}Test.mini"), "w") as f:
                f.write(render_suite(f"{name}Test", tests))
            k += 1


if __name__ == "__main__":
    main()
