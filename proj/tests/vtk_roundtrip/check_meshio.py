"""Reads the fixture's VTK files with meshio and compares every value."""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

try:
    import meshio
    import numpy as np
except ImportError:
    print("meshio not available; skipping")
    sys.exit(77)


def main(fixture):
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp)
        subprocess.run([fixture, str(out)], check=True)
        exp = json.loads((out / "expected.json").read_text())
        failures = []

        def same(name, got, want):
            got, want = np.asarray(got), np.asarray(want)
            if got.shape != want.shape or not np.array_equal(got, want):
                failures.append(f"{name}: shapes {got.shape} vs {want.shape}")

        def grid(path, points, tris):
            m = meshio.read(out / path)
            same(f"{path} points", m.points[:, :2], points)
            same(f"{path} z", m.points[:, 2], np.zeros(len(points)))
            same(f"{path} triangles", m.cells_dict["triangle"], tris)
            return m

        m = grid("scalar.vtk", exp["points"], exp["triangles"])
        same("c", m.point_data["c"].ravel(), exp["c"])
        m = grid("velocity.vtk", exp["points"], exp["triangles"])
        same("u at vertices", m.point_data["u"].ravel(), exp["u_vertices"])
        m = grid("quadratic.vtk", exp["fine_points"], exp["fine_triangles"])
        same("u at nodes", m.point_data["u"].ravel(), exp["u_nodes"])
        m = grid("mesh.vtk", exp["points"], exp["triangles"])
        tags = np.concatenate([np.ravel(a) for a in m.cell_data["boundary_tag"]])
        same("boundary tags", tags, [0] * len(exp["triangles"]) + exp["boundary_tags"])

        for f in failures:
            print("FAIL", f)
        print("meshio round trip:", "FAIL" if failures else "PASS")
        return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1]))
