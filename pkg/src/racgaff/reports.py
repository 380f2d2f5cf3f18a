"""Deterministic report assembly: canonical JSON, CSV rows, SVG scatter.

Reports carry no timestamps, hostnames or object ids; two runs with the
same config and seed must serialize to the same bytes, which the
command-line front end advertises as a guarantee.  Floats pass through
``repr`` (the shortest round-tripping form), keys are sorted at dump
time, and the provenance block hashes the package sources rather than
asking the clock.
"""

import csv
import hashlib
import io
import json
from functools import lru_cache
from pathlib import Path

from . import __version__

SCHEMA_VERSION = 1

_PALETTE = ("#b4443c", "#3c6eb4", "#3f9950")


@lru_cache(maxsize=1)
def library_digest():
    """Content hash of the package sources, for report provenance."""
    root = Path(__file__).resolve().parent
    acc = hashlib.sha256()
    for path in sorted(root.glob("*.py")):
        acc.update(path.name.encode())
        acc.update(b"\0")
        acc.update(path.read_bytes())
        acc.update(b"\0")
    return acc.hexdigest()[:12]


def envelope(kind, config, body):
    """Wrap a report body in the versioned, provenance-carrying shell."""
    out = {
        "schema": SCHEMA_VERSION,
        "kind": kind,
        "config": config,
        "library": {"name": "racgaff", "version": __version__,
                    "source_digest": library_digest()},
    }
    for key, value in body.items():
        if key in out:
            raise ValueError("body key %r collides with the envelope" % key)
        out[key] = value
    return out


def canonical_json(data):
    """Sorted-key, indented JSON with a trailing newline."""
    return json.dumps(data, sort_keys=True, indent=2,
                      ensure_ascii=False) + "\n"


def csv_text(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def svg_scatter(xs, ys, lines=(), title="", xlabel="x", ylabel="y",
                width=640, height=480):
    """A standalone SVG scatter plot, assembled by hand.

    ``lines`` holds (slope, intercept, label) triples drawn across the
    x-range as reference lines.  Coordinates are formatted at fixed
    precision so the output is reproducible byte for byte.
    """
    xs = [float(x) for x in xs]
    ys = [float(y) for y in ys]
    if not xs or len(xs) != len(ys):
        raise ValueError("need matching, nonempty coordinate lists")
    margin = 54.0
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    for slope, intercept, _ in lines:
        y_lo = min(y_lo, slope * x_lo + intercept, slope * x_hi + intercept)
        y_hi = max(y_hi, slope * x_lo + intercept, slope * x_hi + intercept)
    x_pad = 0.05 * (x_hi - x_lo) or 0.5
    y_pad = 0.05 * (y_hi - y_lo) or 0.5
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    def px(x):
        return margin + (x - x_lo) * (width - 2 * margin) / (x_hi - x_lo)

    def py(y):
        return height - margin \
            - (y - y_lo) * (height - 2 * margin) / (y_hi - y_lo)

    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
        'viewBox="0 0 %d %d">' % (width, height, width, height),
        '<rect width="%d" height="%d" fill="#ffffff"/>' % (width, height),
        '<rect x="%.1f" y="%.1f" width="%.1f" height="%.1f" fill="none" '
        'stroke="#222222"/>' % (margin, margin, width - 2 * margin,
                                height - 2 * margin),
    ]
    if title:
        parts.append('<text x="%.1f" y="%.1f" font-family="sans-serif" '
                     'font-size="14" text-anchor="middle">%s</text>'
                     % (width / 2.0, margin - 18.0, title))
    parts.append('<text x="%.1f" y="%.1f" font-family="sans-serif" '
                 'font-size="12" text-anchor="middle">%s</text>'
                 % (width / 2.0, height - 12.0, xlabel))
    parts.append('<text x="14" y="%.1f" font-family="sans-serif" '
                 'font-size="12" text-anchor="middle" '
                 'transform="rotate(-90 14 %.1f)">%s</text>'
                 % (height / 2.0, height / 2.0, ylabel))
    for value, anchor, xpos in ((x_lo, "start", margin),
                                (x_hi, "end", width - margin)):
        parts.append('<text x="%.1f" y="%.1f" font-family="sans-serif" '
                     'font-size="10" text-anchor="%s">%.4g</text>'
                     % (xpos, height - margin + 16.0, anchor, value))
    for value, ypos in ((y_lo, height - margin), (y_hi, margin + 8.0)):
        parts.append('<text x="%.1f" y="%.1f" font-family="sans-serif" '
                     'font-size="10" text-anchor="end">%.4g</text>'
                     % (margin - 6.0, ypos, value))
    for idx, (slope, intercept, label) in enumerate(lines):
        color = _PALETTE[idx % len(_PALETTE)]
        ya, yb = slope * x_lo + intercept, slope * x_hi + intercept
        parts.append('<line x1="%.2f" y1="%.2f" x2="%.2f" y2="%.2f" '
                     'stroke="%s" stroke-dasharray="6 3"/>'
                     % (px(x_lo), py(ya), px(x_hi), py(yb), color))
        parts.append('<text x="%.1f" y="%.1f" font-family="sans-serif" '
                     'font-size="11" fill="%s" text-anchor="end">%s</text>'
                     % (width - margin - 6.0, margin + 16.0 + 14.0 * idx,
                        color, label))
    for x, y in zip(xs, ys):
        parts.append('<circle cx="%.2f" cy="%.2f" r="2.2" fill="#33557a" '
                     'fill-opacity="0.55"/>' % (px(x), py(y)))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
