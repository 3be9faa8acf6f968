"""Lossless text formatting shared by the CSV and JSON writers."""

import re

_FLOAT = "{:.17g}"


def format_real(x):
    """17 significant digits, enough to round-trip any double."""
    return _FLOAT.format(float(x))


def format_complex(z):
    """``a+bi`` with both parts in round-trip precision."""
    z = complex(z)
    im = format_real(z.imag)
    sign = "" if im.startswith("-") else "+"
    return f"{format_real(z.real)}{sign}{im}i"


def parse_complex(text):
    """Parse ``a+bi``, ``a-bj``, ``bi`` or ``a`` into a complex number."""
    s = str(text).strip().replace(" ", "")
    if not s:
        raise ValueError("empty complex literal")
    if s.endswith("i"):
        s = s[:-1] + "j"
    if s in ("j", "+j", "-j"):
        s = s.replace("j", "1j")
    try:
        return complex(s)
    except ValueError:
        pass
    # forms like "0.1+i" or "2-j"
    s2 = re.sub(r"([+-])j$", r"\g<1>1j", s)
    try:
        return complex(s2)
    except ValueError as exc:
        raise ValueError(f"cannot parse complex literal {text!r}") from exc
