"""
Run artifacts
CSV writers and readers for snapshots, profiles and series, plus the
manifest that is written last and marks a completed run.
"""
import hashlib
import os
import re
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.state import AngularProfile, ComplexField1D, GateResult, Grid1D, ObservableSeries, PeakTrain, RunManifest

FLOAT_FORMAT = "%.12e"
MANIFEST_NAME = "manifest.txt"
CONFIG_MARKER = "[config]"


def format_time(t: float) -> str:
    """Compact time label used in file names, e.g. 50 or 312.5"""
    return f"{round(t, 9):g}"


def _write_columns(path: str, header: Sequence[str], columns: Sequence[np.ndarray], fmt=FLOAT_FORMAT) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns]) if columns else np.empty((0, len(header)))
    np.savetxt(path, data, delimiter=",", header=",".join(header), comments="", fmt=fmt)
    return path


def read_columns(path: str) -> Tuple[List[str], np.ndarray]:
    """Header names and a 2D array of the numeric rows"""
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.size == 0:
        data = np.empty((0, len(header)))
    return header, data


def snapshot_name(t: float, prefix: str = "snapshot") -> str:
    return f"{prefix}_t{format_time(t)}.csv"


def write_snapshot(directory: str, psi: ComplexField1D, t: float, prefix: str = "snapshot") -> str:
    """x,re,im,abs of a 1D field"""
    path = os.path.join(directory, snapshot_name(t, prefix))
    values = psi.values
    return _write_columns(
        path, ["x", "re", "im", "abs"], [psi.grid.nodes(), values.real, values.imag, np.abs(values)]
    )


def read_snapshot(path: str) -> Tuple[float, ComplexField1D]:
    _, data = read_columns(path)
    grid = Grid1D(x_min=float(data[0, 0]), x_max=float(data[-1, 0]), n_points=data.shape[0])
    match = re.search(r"_t([-+0-9.e]+)\.csv$", os.path.basename(path))
    t = float(match.group(1)) if match else 0.0
    return t, ComplexField1D(grid=grid, values=data[:, 1] + 1j * data[:, 2])


def snapshot_profile(psi: ComplexField1D, t: float) -> AngularProfile:
    return AngularProfile(time=t, coordinate=psi.grid.nodes(), amplitude=np.abs(psi.values), field=psi.values)


def profile_name(angle: float, t: float) -> str:
    return f"profile_a{format_time(angle)}_t{format_time(t)}.csv"


def write_profile(directory: str, profile: AngularProfile) -> str:
    """r,abs_psi along one ray; Phi profiles also carry re,im for the interior analysis"""
    path = os.path.join(directory, profile_name(profile.angle or 0.0, profile.time))
    header = ["r", "abs_psi"]
    columns = [profile.coordinate, profile.amplitude]
    if profile.quantity == "phi" and profile.field is not None:
        header = ["r", "abs_phi", "re", "im"]
        columns += [profile.field.real, profile.field.imag]
    return _write_columns(path, header, columns)


def read_profile(path: str) -> AngularProfile:
    header, data = read_columns(path)
    match = re.search(r"profile_a([-+0-9.e]+)_t([-+0-9.e]+)\.csv$", os.path.basename(path))
    angle, t = (float(match.group(1)), float(match.group(2))) if match else (0.0, 0.0)
    field = data[:, 2] + 1j * data[:, 3] if len(header) >= 4 else None
    return AngularProfile(
        time=t,
        angle=angle,
        coordinate=data[:, 0],
        amplitude=data[:, 1],
        field=field,
        quantity="phi" if header[1] == "abs_phi" else "psi",
    )


def write_lnorms(directory: str, ls: np.ndarray, norms: np.ndarray, t: float) -> str:
    path = os.path.join(directory, f"lnorms_t{format_time(t)}.csv")
    return _write_columns(path, ["l", "norm"], [ls, norms], fmt=["%d", FLOAT_FORMAT])


def write_observables(directory: str, series: ObservableSeries) -> List[str]:
    """observables.csv with one column per channel plus observable_<name>.csv per channel"""
    names = sorted(series.channels)
    if not names:
        return []
    paths = []
    times = sorted({t for name in names for t, _ in series.channels[name]})
    columns = [np.array(times)]
    for name in names:
        lookup = dict(series.channels[name])
        columns.append(np.array([lookup.get(t, np.nan) for t in times]))
        paths.append(
            _write_columns(
                os.path.join(directory, f"observable_{name}.csv"),
                ["t", "value"],
                [series.times(name), series.values(name)],
            )
        )
    paths.insert(0, _write_columns(os.path.join(directory, "observables.csv"), ["t"] + names, columns))
    return paths


def read_observables(directory: str) -> ObservableSeries:
    series = ObservableSeries()
    if not os.path.isdir(directory):
        return series
    for name in sorted(os.listdir(directory)):
        match = re.fullmatch(r"observable_(\w+)\.csv", name)
        if not match:
            continue
        _, data = read_columns(os.path.join(directory, name))
        for t, value in data:
            series.record(match.group(1), t, value)
    return series


def write_peaks(path: str, train: PeakTrain) -> str:
    return _write_columns(
        path,
        ["index", "position", "height"],
        [np.arange(train.count), train.positions, train.heights],
        fmt=["%d", FLOAT_FORMAT, FLOAT_FORMAT],
    )


def write_fit_report(directory: str, rows: Iterable[Tuple[str, float, float]]) -> str:
    path = os.path.join(directory, "fit_report.csv")
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write("quantity,value,residual\n")
        for quantity, value, residual in rows:
            f.write(f"{quantity},{value:.12e},{residual:.12e}\n")
    return path


def write_compare(directory: str, rows: Sequence[Tuple[float, float, float]]) -> str:
    path = os.path.join(directory, "compare.csv")
    columns = [np.array([row[i] for row in rows]) for i in range(3)]
    return _write_columns(path, ["t", "max_deviation", "rms_deviation"], columns)


def file_digest(path: str) -> str:
    sha = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(65536), b""):
            sha.update(block)
    return sha.hexdigest()


def inventory(directory: str) -> Dict[str, str]:
    """Relative path -> sha256 of every artifact under directory except the manifest"""
    files = {}
    for root, dirs, names in os.walk(directory):
        dirs.sort()
        for name in sorted(names):
            path = os.path.join(root, name)
            relative = os.path.relpath(path, directory).replace(os.sep, "/")
            if relative == MANIFEST_NAME:
                continue
            files[relative] = file_digest(path)
    return files


def remove_manifest(directory: str) -> None:
    path = os.path.join(directory, MANIFEST_NAME)
    if os.path.exists(path):
        os.remove(path)


def write_manifest(directory: str, manifest: RunManifest) -> str:
    """Plain-text manifest; the config echo comes last and runs to the end of the file"""
    lines = [
        "# wellpacket run manifest",
        f"code_version: {manifest.code_version}",
        f"wall_clock_seconds: {manifest.wall_clock_seconds:.3f}",
        f"norm_drift: {'n/a' if manifest.norm_drift is None else f'{manifest.norm_drift:.6e}'}",
        f"passed: {str(manifest.passed).lower()}",
        "[grid]",
    ]
    lines += [f"{key}: {value}" for key, value in sorted(manifest.grid.items())]
    lines.append("[gates]")
    lines += [
        f"{name}: value={gate.value:.6e} threshold={gate.threshold:.6e} passed={str(gate.passed).lower()}"
        for name, gate in sorted(manifest.gates.items())
    ]
    lines.append("[files]")
    lines += [f"{digest}  {name}" for name, digest in sorted(manifest.files.items())]
    lines.append("[log]")
    lines += [entry.replace("\n", " ") for entry in manifest.log]
    lines.append(CONFIG_MARKER)
    path = os.path.join(directory, MANIFEST_NAME)
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
        f.write(manifest.config_text)
    return path


def read_manifest_config(directory: str) -> Optional[str]:
    """Config text echoed by a completed run, or None when the run never completed"""
    path = os.path.join(directory, MANIFEST_NAME)
    if not os.path.exists(path):
        return None
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    _, marker, config_text = text.partition(CONFIG_MARKER + "\n")
    return config_text if marker else None


def _manifest_section(directory: str, section: str) -> List[str]:
    """Non-empty lines of one [section] of the manifest"""
    path = os.path.join(directory, MANIFEST_NAME)
    lines: List[str] = []
    current = None
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if line.startswith("[") and line.endswith("]"):
                current = line
                if current == CONFIG_MARKER:
                    break
                continue
            if current == section and line:
                lines.append(line)
    return lines


def read_manifest_files(directory: str) -> Dict[str, str]:
    files: Dict[str, str] = {}
    for line in _manifest_section(directory, "[files]"):
        digest, _, name = line.partition("  ")
        files[name] = digest
    return files


def read_manifest_gates(directory: str) -> Dict[str, GateResult]:
    """Gates recorded by the run that wrote the manifest"""
    gates: Dict[str, GateResult] = {}
    for line in _manifest_section(directory, "[gates]"):
        name, _, rest = line.partition(": ")
        fields = dict(item.split("=", 1) for item in rest.split())
        gates[name] = GateResult(
            value=float(fields["value"]),
            threshold=float(fields["threshold"]),
            passed=fields["passed"] == "true",
        )
    return gates


def read_manifest_grid(directory: str) -> Dict[str, Any]:
    grid: Dict[str, Any] = {}
    for line in _manifest_section(directory, "[grid]"):
        key, _, value = line.partition(": ")
        try:
            grid[key] = int(value)
        except ValueError:
            try:
                grid[key] = float(value)
            except ValueError:
                grid[key] = value
    return grid
