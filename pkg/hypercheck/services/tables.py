"""Built-in families, in the same mapping layout a family file uses."""

from __future__ import annotations

import itertools
from typing import Any, Dict, List, Optional

Family = Dict[str, Any]

_GAUSS_BASE: Family = {
    "variables": ["z"],
    "ram": [2],
    "A": [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, -1]],
    "lattice": [[-1, -1, 1, 1]],
    "signs": [1],
    "triangulation": [[1, 2, 3], [1, 2, 4]],
    "coefficients": ["1", "0"],
    "gkz_route": True,
}


def _gauss() -> List[Family]:
    return [
        dict(
            _GAUSS_BASE,
            name="Gauss-1",
            description="2F1(r, -r; 1/2; z) as an average of two conjugate powers",
            beta=["-r", "r", "-1/2"],
            horn=["theta(1)*(theta(1)-1/2) - z*(theta(1)+r)*(theta(1)-r)"],
            recipes={"phi": "(sqrt(1-z)+I*sqrt(z))**(2*r)/2 + (sqrt(1-z)-I*sqrt(z))**(2*r)/2"},
            power_form=False,
        ),
        dict(
            _GAUSS_BASE,
            name="Gauss-2",
            description="2F1(r, r+1/2; 1/2; z)",
            beta=["-r", "-r-1/2", "-1/2"],
            horn=["theta(1)*(theta(1)-1/2) - z*(theta(1)+r)*(theta(1)+r+1/2)"],
            recipes={"phi": "(1+sqrt(z))**(-2*r)/2 + (1-sqrt(z))**(-2*r)/2"},
            power_form=False,
        ),
        dict(
            _GAUSS_BASE,
            name="Gauss-3",
            description="2F1(r, r+1/2; 2r; z)",
            beta=["-r", "-r-1/2", "2*r-1"],
            horn=["theta(1)*(theta(1)+2*r-1) - z*(theta(1)+r)*(theta(1)+r+1/2)"],
            recipes={
                "f": "((1+sqrt(1-z))/2)**(-2)",
                "phi": "((1+sqrt(1-z))/2)**(1-2*r)/sqrt(1-z)",
            },
            fg={"f": "f", "g": "(1+sqrt(1-z))/(2*sqrt(1-z))"},
        ),
    ]


def _fc_geometry(n: int) -> Family:
    """Columns e_1..e_{n+2} and e_1+e_2-e_{i+2}; one lattice row per variable."""

    size = n + 2
    unit = [[1 if j == i else 0 for j in range(size)] for i in range(size)]
    flipped = [[1 if j < 2 else (-1 if j == i + 2 else 0) for j in range(size)] for i in range(n)]
    lattice = []
    for i in range(n):
        row = [0] * (2 * n + 2)
        row[0] = row[1] = -1
        row[i + 2] = 1
        row[n + 2 + i] = 1
        lattice.append(row)
    triangulation = []
    for flips in itertools.product((False, True), repeat=n):
        simplex = [1, 2] + [n + 3 + i if flip else i + 3 for i, flip in enumerate(flips)]
        triangulation.append(sorted(simplex))
    return {
        "A": unit + flipped,
        "lattice": lattice,
        "triangulation": triangulation,
        "signs": [1] * n,
        "ram": [2] * n,
    }


def _rising(expr: str, k: int) -> str:
    return "*".join(f"({expr}+{j})" for j in range(k)) or "1"


def _fc(kind: int, n: int) -> Family:
    variables = ["x", "y"] if n == 2 else [f"z{j + 1}" for j in range(n)]
    roots = [f"sqrt({v})" for v in variables]
    family: Family = dict(_fc_geometry(n), name=f"FC-{kind}", variables=variables, gkz_route=n != 2)
    flips = list(itertools.product((0, 1), repeat=n))

    if kind == 1:
        family["description"] = f"Lauricella FC(r, -r; 1/2, ..., 1/2) in {n} variables"
        family["beta"] = ["-r", "r"] + ["-1/2"] * n
        s = "pm(1)*sqrt(x)+sqrt(y)" if n == 2 else "+".join(roots)
        family["recipes"] = {
            "s": s,
            "h": "1-2*s**2",
            "f": "h+2*I*s*sqrt(1-s**2)",
            "phi": "f**r",
        }
        family["relations"] = [["(f-h)**2", "h**2-1"]]
        family["fg"] = {"f": "f", "g": "1"}
        family["coefficients"] = ["1", "2*i*r", "-2*i*r", "4*r**2"] if n == 2 else None
    elif kind == 2:
        family["description"] = f"Lauricella FC(r, r+1/2; 1/2, ..., 1/2) in {n} variables"
        family["beta"] = ["-r", "-r-1/2"] + ["-1/2"] * n
        family["recipes"] = {"s": "+".join(roots), "f": "(s-1)**(-2)", "phi": "f**r"}
        family["fg"] = {"f": "f", "g": "1"}
        family["coefficients"] = [_rising("2*r", sum(flip)) for flip in flips]
    elif kind == 3:
        family["description"] = f"Lauricella FC(r, r+1/2; 1/2, ..., 1/2, 2r) in {n} variables"
        family["beta"] = ["-r", "-r-1/2"] + ["-1/2"] * (n - 1) + ["2*r-1"]
        last = variables[-1]
        h = "+".join(roots[:-1]) + "-1"
        divisor = ", ".join(["0"] * (n - 1) + ["2"])
        family["recipes"] = {
            "h": h,
            "f": f"divmono(8*h**2-4*{last}+8*h*sqrt(h**2-{last}), {divisor})",
            "g": f"1/2-h/(2*sqrt(h**2-{last}))",
            "phi": "f**r*g",
        }
        family["fg"] = {"f": "f", "g": "g"}
        family["coefficients"] = ["1", "0", "2*r", "0"] if n == 2 else None
    else:
        raise ValueError(f"Unknown FC family kind {kind}")

    if n == 2:
        family["horn"] = _f4_horn(kind)
    return family


def _f4_horn(kind: int) -> List[str]:
    ab = {
        1: "(theta(1)+theta(2)+r)*(theta(1)+theta(2)-r)",
        2: "(theta(1)+theta(2)+r)*(theta(1)+theta(2)+r+1/2)",
        3: "(theta(1)+theta(2)+r)*(theta(1)+theta(2)+r+1/2)",
    }[kind]
    second_c = "theta(2)*(theta(2)+2*r-1)" if kind == 3 else "theta(2)*(theta(2)-1/2)"
    return [f"theta(1)*(theta(1)-1/2) - x*{ab}", f"{second_c} - y*{ab}"]


_G3_DELTA = "1+4*x+4*y+18*x*y-27*x**2*y**2"


def _g3() -> Family:
    return {
        "name": "G3",
        "description": "Horn G3(r, -r) as a power of a cubic root times an algebraic factor",
        "variables": ["x", "y"],
        "ram": [1, 1],
        "A": [[1, 1], [0, 1], [-1, 1], [2, 1]],
        "lattice": [[1, -2, 1, 0], [-2, 1, 0, 1]],
        "signs": [-1, -1],
        "beta": ["-r", "-1"],
        "triangulation": [[1, 2], [2, 3], [1, 4]],
        "horn": [
            "theta(1)*(-theta(1)+2*theta(2)+r) - x*(2*theta(1)-theta(2)-r+1)*(2*theta(1)-theta(2)-r+2)",
            "theta(2)*(2*theta(1)-theta(2)+1-r) - y*(-theta(1)+2*theta(2)+r)*(-theta(1)+2*theta(2)+r+1)",
        ],
        "horn_extra": [["(r-2)/3", "-(r+1)/3"]],
        "coefficients": ["1", "0", "0", "0"],
        "recipes": {
            "f": "algroot(1, 0, -x, -1, 1, y)",
            "g": "-3*y**2*f**2-2*y*f+4*y+1",
            "Delta": _G3_DELTA,
            "phi": "f**r*sqrt(g/Delta)",
        },
        "fg": {"f": "f", "g": "sqrt(g/Delta)"},
        "discriminant": {"recipe": "f", "expected": _G3_DELTA},
        "variants": {
            "plus-x": {"recipes": {"f": "algroot(1, 0, x, -1, 1, y)"}, "validated": False},
        },
    }


_H4_BASE: Family = {
    "variables": ["x", "y"],
    "ram": [2, 2],
    "A": [
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, 1, 0],
        [0, 0, 0, 1],
        [2, 0, -1, 0],
        [1, 1, 0, -1],
    ],
    "lattice": [[-2, 0, 1, 0, 1, 0], [-1, -1, 0, 1, 0, 1]],
    "signs": [1, 1],
    "triangulation": [[1, 2, 3, 4], [1, 2, 3, 6], [1, 2, 4, 5], [1, 2, 5, 6]],
}

_H4_FIRST = "theta(1)*(theta(1)-1/2) - x*(2*theta(1)+theta(2)+r)*(2*theta(1)+theta(2)+r+1)"


def _h4() -> List[Family]:
    return [
        dict(
            _H4_BASE,
            name="H4-1",
            description="Horn H4(r, -r; 1/2, 1/2)",
            beta=["-r", "r", "-1/2", "-1/2"],
            horn=[_H4_FIRST, "theta(2)*(theta(2)-1/2) - y*(2*theta(1)+theta(2)+r)*(theta(2)-r)"],
            coefficients=["1", "-2*i*r", "2*r", "-2*i*r*(2*r+1)"],
            recipes={
                "f": "(1-2*sqrt(x)+2*y+2*sqrt(y*(-1+2*sqrt(x)+y)))/(1-2*sqrt(x))**2",
                "phi": "f**r",
            },
            fg={"f": "f", "g": "1"},
        ),
        dict(
            _H4_BASE,
            name="H4-2",
            description="Horn H4(r, r+1/2; 1/2, 1/2)",
            beta=["-r", "-r-1/2", "-1/2", "-1/2"],
            horn=[_H4_FIRST, "theta(2)*(theta(2)-1/2) - y*(2*theta(1)+theta(2)+r)*(theta(2)+r+1/2)"],
            coefficients=["1", "-2*r", "2*r", "-2*r*(2*r+1)"],
            recipes={"f": "1/(sqrt(1-2*sqrt(x))+sqrt(y))**2", "phi": "f**r"},
            fg={"f": "f", "g": "1"},
        ),
        dict(
            _H4_BASE,
            name="H4-3",
            description="Horn H4(r, r+1/2; 1/2, 2r), a candidate that does not hold as written",
            beta=["-r", "-r-1/2", "-1/2", "2*r-1"],
            horn=[_H4_FIRST, "theta(2)*(theta(2)+2*r-1) - y*(2*theta(1)+theta(2)+r)*(theta(2)+r+1/2)"],
            coefficients=["1", "0", "2*r", "0"],
            recipes={
                "h": "sqrt((2*sqrt(x)-1)*(2*sqrt(x)+y-1))",
                "f": "divmono(-16*sqrt(x)-4*y+8-4*h, 0, 2)",
                "g": "1/2+(1-2*sqrt(x))/(2*h)",
                "phi": "f**r*g",
            },
            validated=False,
        ),
    ]


def _h5() -> Family:
    return {
        "name": "H5",
        "description": "Horn H5(r, -r; 1/2) as a power of a quartic root with a double root at the origin",
        "variables": ["x", "y"],
        "ram": [2, 2],
        "A": [[1, 0, 0], [0, 1, 0], [0, 0, 1], [2, -1, 0], [1, 1, -1]],
        "lattice": [[-2, 1, 0, 1, 0], [-1, -1, 1, 0, 1]],
        "signs": [-1, 1],
        "beta": ["-r", "r", "-1/2"],
        "triangulation": [[1, 2, 3], [1, 2, 5], [1, 3, 4], [1, 4, 5]],
        "horn": [
            "theta(1)*(-theta(1)+theta(2)-r) - x*(2*theta(1)+theta(2)+r)*(2*theta(1)+theta(2)+r+1)",
            "theta(2)*(theta(2)-1/2) - y*(2*theta(1)+theta(2)+r)*(-theta(1)+theta(2)-r)",
        ],
        "coefficients": ["1", "2*i*r", "0", "0"],
        "recipes": {
            "f": "algroot(1, 2, 1, 4*y-2, 1-2*x, 2*x, x**2)",
            "phi": "f**r",
        },
        "fg": {"f": "f", "g": "1"},
    }


def builtin_families(fc_n: Optional[int] = 2) -> List[Family]:
    """Every built-in family; the FC entries use ``fc_n`` variables."""

    fc_n = fc_n or 2
    if fc_n < 2:
        raise ValueError("FC families need at least two variables")
    families: List[Family] = []
    families.extend(_gauss())
    families.extend(_fc(kind, fc_n) for kind in (1, 2, 3))
    families.append(_g3())
    families.extend(_h4())
    families.append(_h5())
    return families


FAMILY_ORDER = ("Gauss-1", "Gauss-2", "Gauss-3", "FC-1", "FC-2", "FC-3", "G3", "H4-1", "H4-2", "H4-3", "H5")
