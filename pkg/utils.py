import os
import json
import math
from typing import Iterable, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

plt.rcParams["svg.hashsalt"] = "slspectra"  # stable element ids across runs


class Utils:

    @staticmethod
    def read_json(path):
        with open(path, "r") as f:
            return json.load(f)

    @staticmethod
    def save_json(obj, path, delete_prev_file=False):
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        if os.path.exists(path) and delete_prev_file:
            os.remove(path)
        with open(path, "w") as f:
            json.dump(obj, f, indent=4)

    @staticmethod
    def read_file(path):
        with open(path, "r", encoding="utf-8") as f:
            return f.read()

    @staticmethod
    def save_file(string, path, delete_prev_file=False):
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        if os.path.exists(path) and delete_prev_file:
            os.remove(path)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(string)

    @staticmethod
    def append_file(string, path):
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "a", encoding="utf-8") as f:
            f.write(string + "\n")

    @staticmethod
    def format_value(value) -> str:
        """17 significant digits for floats, so a CSV round-trips every double."""
        if isinstance(value, bool):
            return str(value).lower()
        if isinstance(value, int):
            return str(value)
        if isinstance(value, float):
            if math.isnan(value):
                return "nan"
            return f"{value:.17g}"
        if value is None:
            return ""
        return str(value)

    @staticmethod
    def write_csv(path: str, columns: Sequence[str], rows: Iterable[Sequence], header: Optional[List[str]] = None):
        """Write a CSV whose first lines are '# '-prefixed header comments."""
        lines = [f"# {line}" if line else "#" for line in (header or [])]
        lines.append(",".join(columns))
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"Row has {len(row)} values for {len(columns)} columns: {row!r}")
            lines.append(",".join(Utils.format_value(v) for v in row))
        Utils.save_file("\n".join(lines) + "\n", path, delete_prev_file=True)

    @staticmethod
    def save_svg(xs: Sequence[float], ys: Sequence[float], path: str, xlabel: str, ylabel: str, title: str = "",
                 hlines: Sequence[float] = ()):
        """Standalone line chart of one series; identical input gives an identical file."""
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        ax.plot(xs, ys, color="tab:blue", linewidth=1.2)
        for y in hlines:
            ax.axhline(y, color="tab:gray", linewidth=0.8, linestyle="--")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.grid(True, linewidth=0.3)
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)

    @staticmethod
    def dict_to_str(d):
        return ' | '.join([f"{k}: {v}" for k, v in d.items()])
