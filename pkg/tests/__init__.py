"""
Тесты для phaseseg.

Пакет покрывает численные модули, компоненты, конфигурацию и командную строку.
"""
