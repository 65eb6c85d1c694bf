from types import MappingProxyType

# Стороны точки относительно контура
INSIDE = "inside"
OUTSIDE = "outside"
BOUNDARY = "boundary"

# Способ вычисления преобразования Коши
CLOSED_FORM = "closed_form"
QUADRATURE = "quadrature"

# Нормировка невязок
RAW = "raw"
PER_ARC_LENGTH = "per_arc_length"

# Названия интерфейсов
OUTER = "outer"
INNER = "inner"

# Минимальное число узлов на контуре
MIN_NODES = 16

# Уплотнение ломаной при подсчёте индекса вблизи контура
WINDING_REFINE = 16

# Единая «точка правды» для допусков
TOLERANCES = MappingProxyType({
    "node_coincidence": 1e-12,
    "boundary_relative": 1e-9,
    "containment_gap_relative": 1e-6,
    "focal_segment": 1e-8,
    "degenerate_area": 1e-14,
    "center_mismatch": 1e-8,
    "spacing_ratio": 10.0,
    "circular_axis": 1e-9,
})

# Коды выхода CLI
EXIT_CODES = MappingProxyType({
    "ok": 0,
    "residual_failed": 1,
    "invalid_input": 2,
    "numerical_failure": 3,
    "not_converged": 4,
})

# Колонки CSV
CSV_COLUMNS = MappingProxyType({
    "residuals": ("interface", "node_index", "s", "re_z", "im_z", "residual"),
    "diagnostics": (
        "time", "area_outer", "area_inner", "re_centroid", "im_centroid",
        "fitted_angle", "measured_omega",
    ),
    "transform": ("re_z", "im_z", "re_value", "im_value", "side", "method"),
    "sweep": ("q2", "alpha", "omega", "q1", "sup_outer", "sup_inner", "passed"),
    "continuation": ("alpha", "omega", "q1", "sup_residual", "iterations"),
})

# Формат чисел с плавающей точкой: 17 значащих цифр сохраняют double бит в бит
FLOAT_FORMAT = ".17g"

# Окно SVG-кадров
SVG_VIEWPORT = MappingProxyType({"width": 600, "height": 600, "margin": 0.1})
