"""
Исключения библиотеки
"""


class VStateError(Exception):
    """Базовое исключение"""


class GeometryError(VStateError):
    """Некорректный контур, эллипс или нарушение вложенности"""


class DegenerateGeometryError(GeometryError):
    """Вырожденная геометрия: нулевая площадь, неопределённая ось"""


class BranchCutError(VStateError):
    """Вычисление на фокальном отрезке (разрез ветви корня)"""


class SideError(VStateError):
    """Одностороннее значение запрошено не с той стороны контура"""


class InadmissibleParametersError(VStateError):
    """Параметры вне допустимого интервала"""


class DegenerateConfigurationError(VStateError):
    """Круговой случай: семейство колец, угловая скорость любая"""


class NoRotationError(VStateError):
    """При alpha = 0 и некруговом эллипсе вращения нет"""


class IntegrationAbortedError(VStateError):
    """Интегрирование остановлено: самопересечение, потеря вложенности, сгущение узлов"""


class ConvergenceError(VStateError):
    """Итерации Гаусса–Ньютона не сошлись"""


class ScenarioError(VStateError):
    """Ошибка схемы или разбора входных данных"""
