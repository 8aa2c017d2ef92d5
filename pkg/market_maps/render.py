"""SVG scatter plots of projected rows, coloured by period or by stock.

The default palette has 25 fixed colours, one per period of the standard
20 x 25 dataset. With more categories than colours the palette wraps; the wrap is
logged and reported in the side-car metadata.
"""

import csv
import logging
import math
from dataclasses import dataclass

from django.db import models
from django.template.loader import render_to_string

from .exceptions import EmptyPoints, NonFiniteCoordinate, RenderError

logger = logging.getLogger(__name__)

PALETTE = (
    '#e6194b', '#3cb44b', '#ffe119', '#4363d8', '#f58231',
    '#911eb4', '#46f0f0', '#f032e6', '#bcf60c', '#fabebe',
    '#008080', '#e6beff', '#9a6324', '#fffac8', '#800000',
    '#aaffc3', '#808000', '#ffd8b1', '#000075', '#808080',
    '#000000', '#1f77b4', '#d62728', '#2ca02c', '#ff7f0e',
)

TEMPLATE = 'market_maps/scatter.svg'

POINT_RADIUS = 3
PAD_LEFT = 40
PAD_TOP = 30
PAD_BOTTOM = 20
LEGEND_WIDTH = 100
LEGEND_ROW = 14
DATA_MARGIN = 0.05


class ColorBy(models.TextChoices):
    PERIOD = 'period', 'Period'
    STOCK = 'stock', 'Stock'


@dataclass(frozen=True)
class PlotSpec:
    points: tuple
    width: int = 800
    height: int = 600
    color_by: str = ColorBy.PERIOD
    title: str = ''
    palette: tuple = PALETTE


def _num(value):
    return format(float(value), '.6g')


def _check(spec):
    if not spec.points:
        raise EmptyPoints('nothing to plot')
    for i, (x, y, _, _) in enumerate(spec.points):
        if not (math.isfinite(x) and math.isfinite(y)):
            raise NonFiniteCoordinate(f'point {i} has coordinates ({x}, {y})')
    if not spec.palette:
        raise RenderError('palette is empty')
    if spec.width <= PAD_LEFT + LEGEND_WIDTH or spec.height <= PAD_TOP + PAD_BOTTOM:
        raise RenderError(f'{spec.width}x{spec.height} leaves no room for the plot area')


def _category(spec, point):
    return point[2] if ColorBy(spec.color_by) == ColorBy.STOCK else point[3]


def categories(spec):
    return sorted({_category(spec, point) for point in spec.points})


def _bounds(values):
    low, high = min(values), max(values)
    span = high - low
    if span == 0:
        return low - 0.5, high + 0.5
    return low - DATA_MARGIN * span, high + DATA_MARGIN * span


def render_scatter(spec):
    _check(spec)
    kinds = categories(spec)
    if len(kinds) > len(spec.palette):
        logger.warning(
            f'{len(kinds)} categories exceed the {len(spec.palette)}-colour palette; colours wrap'
        )
    colour = {kind: spec.palette[i % len(spec.palette)] for i, kind in enumerate(kinds)}

    left, top = PAD_LEFT, PAD_TOP
    right = spec.width - LEGEND_WIDTH
    bottom = spec.height - PAD_BOTTOM
    x_low, x_high = _bounds([p[0] for p in spec.points])
    y_low, y_high = _bounds([p[1] for p in spec.points])

    # y grows upwards in data space, downwards in pixels
    points = [
        {
            'cx': _num(left + (point[0] - x_low) / (x_high - x_low) * (right - left)),
            'cy': _num(top + (y_high - point[1]) / (y_high - y_low) * (bottom - top)),
            'fill': colour[_category(spec, point)],
        }
        for point in spec.points
    ]
    name = ColorBy(spec.color_by).label
    legend = [
        {
            'x': _num(right + 10),
            'y': _num(top + i * LEGEND_ROW),
            'text_x': _num(right + 24),
            'text_y': _num(top + i * LEGEND_ROW + 9),
            'fill': colour[kind],
            'label': f'{name} {kind}',
        }
        for i, kind in enumerate(kinds)
    ]
    context = {
        'width': _num(spec.width),
        'height': _num(spec.height),
        'title': spec.title,
        'radius': POINT_RADIUS,
        'frame': {
            'x': _num(left), 'y': _num(top),
            'width': _num(right - left), 'height': _num(bottom - top),
            'right': _num(right), 'bottom': _num(bottom),
            'label_x': _num(left - 4), 'label_y': _num(spec.height - 5),
        },
        'axis': {
            'x_low': _num(x_low), 'x_high': _num(x_high),
            'y_low': _num(y_low), 'y_high': _num(y_high),
        },
        'points': points,
        'legend': legend,
    }
    return render_to_string(TEMPLATE, context)


def read_points(stream):
    """(x, y, stock, period) rows from a coordinates CSV: stock_index, period_index,
    then x and y in the third and fourth columns."""
    reader = csv.reader(stream)
    header = next(reader, None)
    if not header or len(header) < 4 or header[:2] != ['stock_index', 'period_index']:
        raise RenderError('coordinates file needs stock_index,period_index and two coordinate columns')
    points = []
    for line_no, fields in enumerate(reader, start=2):
        if not fields:
            continue
        try:
            points.append((float(fields[2]), float(fields[3]), int(fields[0]), int(fields[1])))
        except (ValueError, IndexError):
            raise RenderError(f'coordinates row {line_no} is malformed')
    return tuple(points)


def scatter_metadata(spec):
    """Plain-text side-car: category counts and any palette wrap warning."""
    _check(spec)
    kinds = categories(spec)
    name = ColorBy(spec.color_by).label
    counts = {kind: 0 for kind in kinds}
    for point in spec.points:
        counts[_category(spec, point)] += 1

    lines = [
        f'points: {len(spec.points)}',
        f'color_by: {ColorBy(spec.color_by).value}',
        f'categories: {len(kinds)}',
    ]
    lines += [f'{name} {kind}: {count}' for kind, count in counts.items()]
    if len(kinds) > len(spec.palette):
        lines.append(
            f'warning: {len(kinds)} categories exceed the {len(spec.palette)}-colour palette; '
            f'colours wrap'
        )
    return '\n'.join(lines) + '\n'
