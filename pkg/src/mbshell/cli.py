"""Command-line interface.

Subcommands: mesh validate/refine/tessellate/demo, basis dump/check,
solve linear/newton, bench beam/plate/tube, report rates.
"""

import json
import os
import time

import click
import numpy as np

from . import benchmarks, fileio, generators, oracles
from .basis import BasisSet
from .meshes import MeshError
from .shell import Material, ShellModel


def _ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


def _write_surface(path, mesh, positions=None, resolution=8, basis=None,
                   point_data=None):
    points, faces = fileio.tessellate(mesh, positions=positions,
                                      resolution=resolution, basis=basis)
    if path.endswith(".vtk"):
        fileio.write_vtk(path, points, faces, point_data=point_data)
    else:
        fileio.write_obj(path, points, faces)
    return points, faces


@click.group()
def main():
    """Manifold-basis shell analysis toolkit."""


# -- mesh -------------------------------------------------------------------

@main.group()
def mesh():
    """Control-mesh utilities."""


@mesh.command("validate")
@click.argument("meshfile", type=click.Path(exists=True))
def mesh_validate(meshfile):
    """Load a mesh, run topology checks and report chart statistics."""
    try:
        m = fileio.load_mesh(meshfile)
    except MeshError as exc:
        raise click.ClickException(str(exc))
    classes = {}
    for v in range(m.n_vertices):
        cls = m.classify_chart(v).chart_class
        classes[cls] = classes.get(cls, 0) + 1
    euler = m.n_vertices - m.n_edges + m.n_quads
    click.echo("vertices %d  edges %d  quads %d  euler %d"
               % (m.n_vertices, m.n_edges, m.n_quads, euler))
    interior = sum(1 for e in m.crease_edges if e not in m.boundary_edges)
    click.echo("interior creases %d  concave tags %d"
               % (interior, len(m.concave_tags)))
    for cls in sorted(classes):
        click.echo("chart %-8s %d" % (cls, classes[cls]))
    click.echo("OK")


@mesh.command("refine")
@click.argument("meshfile", type=click.Path(exists=True))
@click.option("--levels", default=1, show_default=True)
@click.option("--limit", is_flag=True,
              help="project control points to the limit surface")
@click.option("--out", required=True, type=click.Path())
def mesh_refine(meshfile, levels, limit, out):
    """Catmull-Clark style refinement of the control mesh."""
    m = fileio.load_mesh(meshfile)
    for _ in range(levels):
        m = m.refine()
    if limit:
        m = m.limit_project()
    fileio.save_mesh_json(m, out)
    click.echo("wrote %s (%d vertices, %d quads)"
               % (out, m.n_vertices, m.n_quads))


@mesh.command("tessellate")
@click.argument("meshfile", type=click.Path(exists=True))
@click.option("--resolution", default=8, show_default=True)
@click.option("--beta", default=1.0, show_default=True)
@click.option("--blending", default="polynomial", show_default=True,
              type=click.Choice(["polynomial", "rational"]))
@click.option("--out", required=True, type=click.Path(),
              help="output surface (.obj or .vtk)")
def mesh_tessellate(meshfile, resolution, beta, blending, out):
    """Sample the surface and write a watertight OBJ/VTK tessellation."""
    m = fileio.load_mesh(meshfile)
    basis = BasisSet(m, beta=beta, blending=blending)
    points, faces = _write_surface(out, m, resolution=resolution, basis=basis)
    click.echo("wrote %s (%d points, %d faces)" % (out, len(points),
                                                   len(faces)))


@mesh.command("demo")
@click.argument("name", type=click.Choice(["genus2", "fold", "tube",
                                           "plate-unstructured"]))
@click.option("--out", required=True, type=click.Path())
def mesh_demo(name, out):
    """Write one of the built-in demo meshes."""
    if name == "genus2":
        m = generators.genus2_mesh()
    elif name == "fold":
        m = generators.fan_mesh(
            [0.0, 0.4 * np.pi, 0.8 * np.pi, 1.2 * np.pi, 1.6 * np.pi],
            closed=True, creases=[0, 3], concave=0)
    elif name == "tube":
        m = benchmarks.tube_mesh(0)
    else:
        m = benchmarks.plate_mesh(0, unstructured=True)
    fileio.save_mesh_json(m, out)
    click.echo("wrote %s" % out)


# -- basis ------------------------------------------------------------------

@main.group()
def basis():
    """Basis-function utilities."""


@basis.command("dump")
@click.argument("meshfile", type=click.Path(exists=True))
@click.option("--resolution", default=4, show_default=True)
@click.option("--beta", default=1.0, show_default=True)
@click.option("--blending", default="polynomial", show_default=True,
              type=click.Choice(["polynomial", "rational"]))
@click.option("--out", required=True, type=click.Path())
def basis_dump(meshfile, resolution, beta, blending, out):
    """Evaluate every basis function on a per-element lattice -> CSV.

    Derivatives are sampled a small offset inside the element: at the
    exact corners the chart map is direction-dependent and only one-sided
    derivative limits exist."""
    m = fileio.load_mesh(meshfile)
    bs = BasisSet(m, beta=beta, blending=blending)
    t = np.arange(resolution + 1) / resolution
    grid = np.array([(a, b) for b in t for a in t])
    grid_d = np.clip(grid, 1e-6, 1.0 - 1e-6)
    with open(out, "w") as fh:
        fh.write("element,eta1,eta2,node,N,dN1,dN2,d2N11,d2N12,d2N22\n")
        for q in range(m.n_quads):
            eb = bs.element(q)
            N, _, _ = eb.evaluate(grid, order=0)
            _, dN, d2N = eb.evaluate(grid_d)
            for p, (e1, e2) in enumerate(grid):
                for k, gid in enumerate(eb.node_ids):
                    fh.write("%d,%.10g,%.10g,%d,%.12g,%.12g,%.12g,%.12g,"
                             "%.12g,%.12g\n"
                             % (q, e1, e2, gid, N[p, k], dN[p, k, 0],
                                dN[p, k, 1], d2N[p, k, 0, 0],
                                d2N[p, k, 0, 1], d2N[p, k, 1, 1]))
    click.echo("wrote %s" % out)


@basis.command("check")
@click.argument("meshfile", type=click.Path(exists=True))
@click.option("--beta", default=1.0, show_default=True)
@click.option("--blending", default="polynomial", show_default=True,
              type=click.Choice(["polynomial", "rational"]))
@click.option("--samples", default=50, show_default=True)
def basis_check(meshfile, beta, blending, samples):
    """Partition-of-unity and derivative-consistency spot checks."""
    m = fileio.load_mesh(meshfile)
    bs = BasisSet(m, beta=beta, blending=blending)
    rng = np.random.default_rng(0)
    eta = rng.uniform(0.02, 0.98, size=(samples, 2))
    worst = [0.0, 0.0, 0.0]
    for q in range(m.n_quads):
        eb = bs.element(q)
        N, dN, d2N = eb.evaluate(eta)
        worst[0] = max(worst[0], float(np.max(np.abs(N.sum(1) - 1.0))))
        worst[1] = max(worst[1], float(np.max(np.abs(dN.sum(1)))))
        worst[2] = max(worst[2], float(np.max(np.abs(d2N.sum(1)))))
    click.echo("partition of unity: N %.3e  dN %.3e  d2N %.3e"
               % tuple(worst))
    ok = worst[0] < 1e-12 and worst[1] < 1e-9 and worst[2] < 1e-7
    click.echo("PASS" if ok else "FAIL")
    if not ok:
        raise SystemExit(1)


# -- solve ------------------------------------------------------------------

def _model_from_config(cfg):
    m = fileio.load_mesh(cfg["mesh"])
    mat = cfg.get("material", {})
    model = ShellModel(
        m, Material(mat.get("E", 1.0), mat.get("nu", 0.0),
                    mat.get("thickness", 0.01)),
        beta=cfg.get("beta", 1.0),
        blending=cfg.get("blending", "polynomial"),
        quadrature=cfg.get("quadrature", 3),
        cells=cfg.get("cells", 4),
        penalty_scale=cfg.get("penalty_scale", 100.0))
    pos = m.node_positions()
    for fix in cfg.get("fix", []):
        comps = fix.get("components", [0, 1, 2])
        value = fix.get("value", 0.0)
        if "vertex" in fix:
            model.fix_vertex(int(fix["vertex"]), comps, value)
        elif "plane" in fix:
            axis = int(fix["plane"]["axis"])
            coord = float(fix["plane"]["value"])
            tol = float(fix["plane"].get("tol", 1e-9))
            for node in np.flatnonzero(np.abs(pos[:, axis] - coord) <= tol):
                model.fix_node(int(node), comps, value)
        elif fix.get("all"):
            for node in range(m.n_nodes):
                model.fix_node(node, comps, value)
    if "pressure" in cfg:
        model.add_pressure(cfg["pressure"])
    for pf in cfg.get("point_forces", []):
        model.add_point_force(int(pf["element"]), pf["eta"], pf["force"])
    for edge in cfg.get("clamp", []):
        model.clamp_edge(int(edge[0]), int(edge[1]))
    joints = cfg.get("joints")
    if joints == "creases":
        for a, b in m.crease_edges:
            if (a, b) not in m.boundary_edges:
                model.rigid_joint(a, b)
    elif joints:
        for a, b in joints:
            model.rigid_joint(int(a), int(b))
    return model


def _solve_common(config, out, newton):
    with open(config) as fh:
        cfg = json.load(fh)
    _ensure_dir(out)
    model = _model_from_config(cfg)
    t0 = time.time()
    if newton:
        u, history = model.solve_newton(
            rtol=cfg.get("rtol", 1e-8), max_iter=cfg.get("max_iter", 30))
    else:
        u = model.solve_linear()
        history = [float(np.linalg.norm(model.residual(u)))]
    seconds = time.time() - t0
    disp = u.reshape(-1, 3)
    np.savetxt(os.path.join(out, "displacement.csv"), disp,
               delimiter=",", header="ux,uy,uz", comments="")
    log = {"solver": "newton" if newton else "linear", "dof": model.ndof,
           "seconds": seconds, "residuals": [float(r) for r in history]}
    with open(os.path.join(out, "solve.json"), "w") as fh:
        json.dump(log, fh, indent=1)
    _write_surface(os.path.join(out, "deformed.vtk"), model.mesh,
                   positions=model.X + disp, basis=model.basis,
                   resolution=cfg.get("resolution", 8))
    click.echo("solved %d dof in %.2fs; wrote %s" % (model.ndof, seconds,
                                                     out))


@main.group()
def solve():
    """Solve a configured shell problem."""


@solve.command("linear")
@click.option("--config", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def solve_linear(config, out):
    """One tangent solve about the reference configuration."""
    _solve_common(config, out, newton=False)


@solve.command("newton")
@click.option("--config", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def solve_newton(config, out):
    """Full Newton iteration."""
    _solve_common(config, out, newton=True)


# -- bench ------------------------------------------------------------------

def _bench_common(report, out, surfaces):
    _ensure_dir(out)
    report.to_csv(os.path.join(out, "convergence.csv"))
    for row in report.levels:
        click.echo("level %d  h %.4g  dof %d  l2 %.4e  energy %.4e  (%.1fs)"
                   % (row["level"], row["h"], row["dof"], row["l2"],
                      row["energy"], row["seconds"]))
    click.echo("fitted rates: l2 %.2f  energy %.2f"
               % (report.rate("l2"), report.rate("energy")))
    for level, (model, u) in enumerate(surfaces):
        _write_surface(os.path.join(out, "level%d.vtk" % level), model.mesh,
                       positions=model.X + u.reshape(-1, 3),
                       basis=model.basis, resolution=4)


@main.group()
def bench():
    """Convergence benchmarks."""


@bench.command("beam")
@click.option("--variant", default="continuous", show_default=True,
              type=click.Choice(["continuous", "hinged", "jointed"]))
@click.option("--levels", default=4, show_default=True)
@click.option("--quadrature", default=2, show_default=True)
@click.option("--blending", default="polynomial", show_default=True,
              type=click.Choice(["polynomial", "rational"]))
@click.option("--penalty-scale", default=100.0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def bench_beam(variant, levels, quadrature, blending, penalty_scale, out):
    """Propped-cantilever strip convergence study."""
    report, sols = benchmarks.run_beam(
        variant, levels=levels, quadrature=quadrature, blending=blending,
        penalty_scale=penalty_scale)
    _bench_common(report, out, sols)


@bench.command("plate")
@click.option("--bc", default="ssss", show_default=True,
              type=click.Choice(["ssss", "scsc"]))
@click.option("--unstructured", is_flag=True)
@click.option("--levels", default=4, show_default=True)
@click.option("--quadrature", default=2, show_default=True)
@click.option("--blending", default="polynomial", show_default=True,
              type=click.Choice(["polynomial", "rational"]))
@click.option("--penalty-scale", default=100.0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def bench_plate(bc, unstructured, levels, quadrature, blending,
                penalty_scale, out):
    """Square-plate convergence study."""
    report, sols = benchmarks.run_plate(
        bc=bc, unstructured=unstructured, levels=levels,
        quadrature=quadrature, blending=blending,
        penalty_scale=penalty_scale)
    _bench_common(report, out, sols)


@bench.command("tube")
@click.option("--loads", default="10,50,100", show_default=True)
@click.option("--unstructured", is_flag=True)
@click.option("--level", default=0, show_default=True)
@click.option("--quadrature", default=3, show_default=True)
@click.option("--penalty-scale", default=100.0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def bench_tube(loads, unstructured, level, quadrature, penalty_scale, out):
    """Pinched-tube load-displacement study (Newton continuation)."""
    loads = [float(s) for s in loads.split(",")]
    _ensure_dir(out)
    model, u, curve = benchmarks.run_tube(
        loads=loads, unstructured=unstructured, level=level,
        quadrature=quadrature, penalty_scale=penalty_scale, verbose=True)
    with open(os.path.join(out, "curve.csv"), "w") as fh:
        fh.write("step,F,deflection,newton_iters\n")
        for step, row in enumerate(curve):
            fh.write("%d,%g,%.10g,%d\n" % (step, row["F"],
                                           row["deflection"], row["iters"]))
    _write_surface(os.path.join(out, "deformed.vtk"), model.mesh,
                   positions=model.X + u.reshape(-1, 3), basis=model.basis,
                   resolution=3)
    for row in curve:
        click.echo("F %6.1f  deflection %.6g  iters %d"
                   % (row["F"], row["deflection"], row["iters"]))
    click.echo("wrote %s" % out)


# -- report -----------------------------------------------------------------

@main.group()
def report():
    """Post-processing of benchmark output."""


@report.command("rates")
@click.argument("csvfile", type=click.Path(exists=True))
@click.option("--last", default=3, show_default=True,
              help="number of finest levels used in the fit")
def report_rates(csvfile, last):
    """Least-squares convergence rates from a convergence.csv file."""
    rows = np.genfromtxt(csvfile, delimiter=",", names=True)
    rows = np.atleast_1d(rows)
    h = np.log(rows["h"][-last:])
    for key in ("l2", "energy"):
        e = np.log(rows[key][-last:])
        rate = float(np.polyfit(h, e, 1)[0])
        click.echo("%s rate: %.3f" % (key, rate))


if __name__ == "__main__":
    main()
