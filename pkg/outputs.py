"""
Модуль для записи результатов: CSV, JSON и SVG-кадры
"""
import csv
import json
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union
from xml.sax.saxutils import escape

import numpy as np

from constants import CSV_COLUMNS, FLOAT_FORMAT, SVG_VIEWPORT
from contours import Contour
from rotation import ResidualReport
from scenario import Scenario

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _cell(value) -> str:
    """Ячейка CSV: числа с 17 значащими цифрами, None как пустая строка"""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), FLOAT_FORMAT)
    return str(value)


def write_csv(path: PathLike, kind: str, rows: Iterable[Sequence]) -> Path:
    """Записать строки под заголовком CSV_COLUMNS[kind]"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = CSV_COLUMNS[kind]
    count = 0
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"row of length {len(row)} does not match {kind} columns")
            writer.writerow([_cell(v) for v in row])
            count += 1
    logger.info(f"Wrote {count} rows to {path}")
    return path


def _plain(value):
    """Привести numpy и complex к JSON-совместимым типам"""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def write_json(path: PathLike, data: Dict) -> Path:
    """JSON с кратчайшим точным представлением чисел double"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_plain(data), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path


def residual_rows(report: ResidualReport) -> List[tuple]:
    """Строки отчёта невязок: интерфейс, номер узла, параметр s, узел и значение"""
    rows = []
    counters: Dict[str, int] = {}
    totals = {label: report.interfaces.count(label) for label in set(report.interfaces)}
    for i, (label, value) in enumerate(zip(report.interfaces, report.values)):
        k = counters.get(label, 0)
        counters[label] = k + 1
        z = report.nodes[i] if report.nodes is not None else complex("nan")
        rows.append((label, k, 2 * np.pi * k / totals[label], float(z.real), float(z.imag), float(value)))
    return rows


def write_residuals(path: PathLike, report: ResidualReport) -> Path:
    return write_csv(path, "residuals", residual_rows(report))


def report_summary(report: ResidualReport) -> Dict:
    summary = {
        "sup_norm": report.sup_norm,
        "l2_norm": report.l2_norm,
        "normalization": report.normalization,
        "nodes": len(report.values),
    }
    for label in dict.fromkeys(report.interfaces):
        summary[f"sup_{label}"] = report.part(label).sup_norm
    summary.update({k: v for k, v in report.meta.items()})
    return summary


def dump_scenario(scenario: Scenario, path: Optional[PathLike] = None) -> Dict:
    """Сценарий в виде JSON-словаря; при заданном пути ещё и в файл"""
    data = scenario.model_dump(mode="json", exclude_none=True)
    if path is not None:
        write_json(path, data)
    return data


def frame_bounds(frames: Iterable[Sequence[Contour]]) -> Tuple[complex, complex]:
    """Общий ограничивающий прямоугольник (нижний левый и верхний правый углы) для серии кадров"""
    points = np.concatenate([np.asarray(c.samples) for contours in frames for c in contours])
    return complex(points.real.min(), points.imag.min()), complex(points.real.max(), points.imag.max())


def write_svg(path: PathLike, contours: Sequence[Contour], title: str = "",
              bounds: Optional[Tuple[complex, complex]] = None) -> Path:
    """Кадр SVG: по одной ломаной на интерфейс

    Окно задаётся bounds (см. frame_bounds); кадры одной серии с общими bounds
    рисуются в одном масштабе. Без bounds окно подгоняется под сам кадр.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    width, height, margin = SVG_VIEWPORT["width"], SVG_VIEWPORT["height"], SVG_VIEWPORT["margin"]
    lo, hi = bounds if bounds is not None else frame_bounds([contours])
    span = max(hi.real - lo.real, hi.imag - lo.imag) * (1 + 2 * margin)
    mid = (lo + hi) / 2
    scale = min(width, height) / span

    def to_screen(z: complex) -> str:
        x = width / 2 + (z.real - mid.real) * scale
        y = height / 2 - (z.imag - mid.imag) * scale
        return f"{x:.3f},{y:.3f}"

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f"  <title>{escape(title)}</title>",
        f'  <rect width="{width}" height="{height}" fill="white"/>',
    ]
    colours = ("#1f4e79", "#b03a2e")
    for i, c in enumerate(contours):
        samples = list(np.asarray(c.samples)) + [c.samples[0]]
        coords = " ".join(to_screen(z) for z in samples)
        lines.append(f'  <polyline points="{coords}" fill="none" stroke="{colours[i % 2]}" stroke-width="1.5"/>')
    lines.append("</svg>")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
