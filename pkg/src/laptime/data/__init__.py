"""Bundled default data: vehicle config, tire file, synthetic tracks."""

from importlib import resources


def _path(name: str):
    return resources.files(__package__).joinpath(name)


def default_tir_path():
    return _path("race_slick.tir")


def default_vehicle_path():
    return _path("vehicle_f3.yaml")


def track_path(name: str):
    return _path(f"tracks/{name}.csv")
