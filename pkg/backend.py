"""
Blow-up Lab - Backend CLI
=========================

Command-line interface for the blow-up experiments.

Usage:
    python backend.py hypotheses --config config.json --out output
    python backend.py all --config config.json --override nonlinearity.q=5

This can be used:
1. As a standalone script (or through run.sh as `blowup-lab`)
2. Imported as a module: BlowupLab runs each pipeline step programmatically

Exit codes: 0 success, 1 computational failure, 2 hypotheses fail,
3 invalid configuration or command line.
"""

import argparse
import logging
import sys
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from modules.asymptotics import asymptotics_table
from modules.config import ExperimentConfig, apply_overrides, load_config, resolve_threads
from modules.errors import ConfigError, LabError
from modules.maxprinciple_lab import euler_solution, euler_zeros, operator_map
from modules.pde_solver import (
    DiskSolution,
    PolarGrid,
    solve_disk,
    solve_truncation_sequence,
    symmetry_defect,
    symmetry_report,
)
from modules.radial_solver import (
    RadialSolution,
    boundary_law_report,
    collocation_residual,
    power_rate_report,
    solve_unit_ball,
)
from modules.reports import HypothesisReport, hypothesis_report, maxprinciple_report
from modules.utils import ArtifactWriter, geometric_grid, new_figure

COMMANDS = ('hypotheses', 'radial', 'pde', 'symmetry', 'maxprinciple', 'all')

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_HYPOTHESES = 2
EXIT_CONFIG = 3


class BlowupLab:
    """
    Main class for the blow-up experiments

    Each step writes its artifacts through one ArtifactWriter; the radial
    solution and the disk solves are computed once and shared by later steps.
    """

    def __init__(self, config: ExperimentConfig, output_dir: Optional[str] = None, threads: int = 1):
        """
        Args:
            config: ExperimentConfig
            output_dir: Output directory (defaults to config.output_dir)
            threads: Worker threads for the bracket scan and truncation solves
        """
        self.config = config
        self.threads = threads
        self.writer = ArtifactWriter(output_dir or config.output_dir)
        self.gp = config.build_profile()

        self.hypotheses: Optional[HypothesisReport] = None
        self.radial: Optional[RadialSolution] = None
        self.disks: List[DiskSolution] = []
        self.step = 'setup'

        print(f"✓ Nonlinearity: {self.gp.f.label} (threshold {self.gp.threshold:.6g}, t0 {self.gp.t0:.6g})")

    # ------------------------------------------------------------------
    # Steps
    # ------------------------------------------------------------------

    def run_hypotheses(self) -> HypothesisReport:
        """Growth hypotheses and the asymptotics table"""
        self.step = 'hypotheses'
        hyp = self.config.hypotheses
        print("\n🔎 Checking growth hypotheses...")

        report = hypothesis_report(
            self.gp,
            K=hyp.K,
            shift_p=hyp.p,
            window=tuple(hyp.window),
            shift=hyp.shift,
            condition_p=hyp.condition_p,
            alpha=hyp.alpha,
            gamma=hyp.gamma,
            inequality_points=hyp.table_points,
        )
        self.hypotheses = report
        self.writer.write_json('hypothesis_report.json', report)

        print(f"  • Keller-Osserman: {report.ko.verdict}")
        print(f"  • Shifted monotonicity: {'holds' if report.shift_monotone.holds else 'fails'}")
        if report.h2 is not None:
            print(f"  • Growth condition (p={hyp.condition_p:g}): {report.h2.verdict}")

        if report.ko.passed:
            ts = [t for t in hyp.table_points if t > self.gp.t0]
            alpha = (hyp.alpha or self.gp.f.exponential_rate) if report.exp_variant else None
            table = asymptotics_table(self.gp, ts, hyp.condition_p, alpha)
            self.writer.write_csv('asymptotics.csv', table)
            self._plot_asymptotics()
            print(f"✓ Asymptotics table with {len(table)} rows")

        print(f"✓ Theorem applicable: {report.theorem_applicable}")
        return report

    def run_radial(self) -> RadialSolution:
        """Unit-ball radial solution and its boundary laws"""
        if self.radial is not None:
            return self.radial
        self.step = 'radial'
        rad = self.config.radial
        print(f"\n🎯 Solving the radial problem on the unit ball (N={rad.N})...")

        sol = solve_unit_ball(self.gp, rad.N, self.config.radial_settings(self.threads))
        self.radial = sol
        self.writer.write_csv('radial.csv', sol.to_frame())

        laws = boundary_law_report(sol, window=rad.boundary_window)
        report: Dict = {
            'N': rad.N,
            'center_value': sol.center_value,
            'blowup_radius_raw': sol.blowup_radius_raw,
            'nodes': len(sol.nodes),
            'collocation_residual': collocation_residual(sol),
            'boundary_laws': laws.to_dict(),
        }
        f = self.gp.f
        if f.family == 'power' and f.q > 1:
            report['power_rate'] = power_rate_report(sol, f.q, window=rad.boundary_window)
        self.writer.write_json('radial_report.json', report)
        self._plot_radial(sol)

        print(f"✓ c* = {sol.center_value:.12g}")
        print(f"✓ ψ(U)/d → {laws.psi_ratio_limit:.6f}, U'/√F(U) → {laws.sqrtF_ratio_limit:.6f}")
        return sol

    def run_pde(self) -> List[DiskSolution]:
        """Truncated disk problems along the M sequence and the restriction check"""
        if self.disks:
            return self.disks
        radial = self.run_radial()
        self.step = 'pde'
        pde = self.config.pde
        print(f"\n🧮 Solving truncated problems on a {pde.n_r}×{pde.n_theta} polar grid...")

        grid = PolarGrid.build(pde.n_r, pde.n_theta, radius=1.0, grading=pde.grading, radial=radial)
        self.disks = solve_truncation_sequence(
            self.gp, pde.M_sequence, pde.eps_b, pde.m, grid, radial, threads=self.threads, phase=pde.phase
        )
        for sol in self.disks:
            print(f"  • M={sol.boundary_level:g}: {sol.iterations} Newton steps, residual {sol.newton_residual:.2e}")

        restriction = self._restriction_check(radial)
        final = self.disks[-1]
        self.writer.write_csv('disk_solution.csv', final.to_frame())
        self.writer.write_json('disk_report.json', {
            'grid': {'n_r': pde.n_r, 'n_theta': pde.n_theta, 'grading': pde.grading},
            'eps_b': pde.eps_b,
            'm': pde.m,
            'solves': [
                {
                    'M': sol.boundary_level,
                    'iterations': sol.iterations,
                    'newton_residual': sol.newton_residual,
                    'tolerance': sol.tolerance,
                    'residual_history': sol.residual_history,
                }
                for sol in self.disks
            ],
            'restriction': restriction,
        })
        self._plot_disk(final)

        print(f"✓ Restriction check (h={pde.restriction_h:g}): max |u - U| = {restriction['max_error']:.3e}")
        return self.disks

    def run_symmetry(self) -> Dict:
        """Symmetry diagnostics of the perturbed solves"""
        disks = self.run_pde()
        radial = self.run_radial()
        self.step = 'symmetry'
        pde = self.config.pde
        print("\n🪞 Running symmetry diagnostics...")

        comparison = self._comparison_solve(radial)
        report = symmetry_report(
            disks[-1],
            radial,
            pde.lambdas,
            slab_lambda=pde.slab_lambda,
            slab_C=pde.slab_C,
            comparison=comparison,
            trend_solutions=disks,
        )
        data = report.to_dict()
        data['defect_by_level'] = [
            {'M': sol.boundary_level, 'global_defect': symmetry_defect(sol)[1]}
            for sol in disks
        ]
        self.writer.write_json('symmetry_report.json', data)
        self._plot_symmetry(report)

        print(f"✓ Global defect at M={disks[-1].boundary_level:g}: {report.global_defect:.3e}")
        mp_min = min(value for _, value in report.movingplane_min) if report.movingplane_min else float('nan')
        print(f"✓ Moving plane: min u - u_λ = {mp_min:.3e} (tolerance {report.movingplane_tolerance['tolerance']:.1e})")
        if report.slab is not None:
            print(f"✓ Slab containment at λ={pde.slab_lambda:g}: {report.slab.violations} violation(s) "
                  f"of {report.slab.points} point(s)")
        return data

    def run_maxprinciple(self):
        """Barrier verification and the Euler counterexample"""
        radial = self.run_radial()
        self.step = 'maxprinciple'
        mp = self.config.maxprinciple
        print(f"\n🧱 Verifying the barrier at λ={mp.lam:g}...")

        report = maxprinciple_report(
            self.gp, radial, mp.p, mp.lam, mp.C0,
            C_H=mp.C_H, exponent=mp.exponent, samples=mp.samples,
            euler_C0=mp.euler_C0, euler_interval=tuple(mp.euler_interval),
        )
        self.writer.write_json('barrier_report.json', report)

        zeros = euler_zeros(mp.euler_C0, tuple(mp.euler_interval))
        self.writer.write_csv('euler_zeros.csv', pd.DataFrame(zeros.to_rows(), columns=['k', 'x_k']))
        self._plot_euler(mp.euler_C0, tuple(mp.euler_interval), zeros.zeros)
        self._plot_lens(radial, report.barrier)

        print(f"✓ Barrier verdict: {report.barrier.verdict} (μ = {report.barrier.mu:g})")
        print(f"✓ Euler zeros in {tuple(mp.euler_interval)}: {report.euler_zero_count}")
        return report

    def run(self, command: str) -> int:
        """
        Run one command's pipeline and write manifest.json

        Returns:
            Exit code (0 or 2; errors propagate)
        """
        code = EXIT_OK
        try:
            if command in ('hypotheses', 'all'):
                report = self.run_hypotheses()
                if not report.theorem_applicable:
                    code = EXIT_HYPOTHESES
                    if command == 'all':
                        print("\n⚠️  Hypotheses fail; skipping the solver steps")
                        return code
            if command in ('radial', 'all'):
                self.run_radial()
            if command in ('pde', 'all'):
                self.run_pde()
            if command in ('symmetry', 'all'):
                self.run_symmetry()
            if command in ('maxprinciple', 'all'):
                self.run_maxprinciple()
            return code
        finally:
            self.writer.write_manifest({'command': command, 'config': self.config.to_dict()})

    # ------------------------------------------------------------------
    # Helpers
    # ------------------------------------------------------------------

    def _restriction_check(self, radial: RadialSolution) -> Dict:
        """Solve on the disk of radius 1 - h with data U(1 - h); compare with U"""
        pde = self.config.pde
        radius = 1.0 - pde.restriction_h
        grid = PolarGrid.build(pde.n_r, pde.n_theta, radius=radius)
        trace = radial.value(radius)
        sol = solve_disk(self.gp, trace, 0.0, 0, grid, radial)
        exact = DiskSolution.from_radial(radial, grid)
        error = np.abs(sol.values - exact.values)
        return {
            'h': pde.restriction_h,
            'boundary_value': trace,
            'max_error': float(np.max(error)),
            'iterations': sol.iterations,
        }

    def _comparison_solve(self, radial: RadialSolution) -> DiskSolution:
        """Perturbed data on the disk of radius 1 - h, kept below the radial trace"""
        pde = self.config.pde
        radius = 1.0 - pde.restriction_h
        grid = PolarGrid.build(pde.n_r, pde.n_theta, radius=radius)
        trace = radial.value(radius)
        level = trace / (1.0 + pde.eps_b)
        return solve_disk(self.gp, level, pde.eps_b, pde.m, grid, radial, phase=pde.phase)

    def _plot_asymptotics(self):
        ts = geometric_grid(max(self.gp.t0, 1.0) * 2.0, self.gp.sample_cap, 8)
        fig, ax = new_figure()
        ax.semilogx(ts, self.gp.log_psi_many(ts), label='log ψ(t)')
        ax.semilogx(ts, self.gp.log_phi_many(ts), label='log φ(t)')
        ax.set_xlabel('t')
        ax.legend()
        self.writer.write_svg('asymptotics.svg', fig)

    def _plot_radial(self, sol: RadialSolution):
        frame = sol.to_frame()
        frame = frame[frame['d'] > 0]
        fig, ax = new_figure()
        ax.semilogx(frame['d'], frame['psiU_over_d'], label='ψ(U)/d')
        ax.semilogx(frame['d'], frame['Uprime_over_sqrtF'] / np.sqrt(2.0), label="U'/√(2F(U))")
        ax.axhline(1.0, color='gray', linewidth=0.8, linestyle='--')
        ax.set_xlabel('d = 1 - r')
        ax.legend()
        self.writer.write_svg('radial.svg', fig)

    def _plot_disk(self, sol: DiskSolution):
        g = sol.grid
        theta = np.append(g.theta, 2.0 * np.pi)
        X = np.outer(g.r, np.cos(theta))
        Y = np.outer(g.r, np.sin(theta))
        u = np.concatenate((sol.values, sol.values[:, :1]), axis=1)
        defect = u - u.mean(axis=1, keepdims=True)

        fig, axes = new_figure(11.0, 4.6, ncols=2)
        for ax, values, title in ((axes[0], u, 'u'), (axes[1], defect, 'u - ring mean')):
            mesh = ax.pcolormesh(X, Y, values, shading='gouraud')
            fig.colorbar(mesh, ax=ax)
            ax.set_aspect('equal')
            ax.set_title(title)
        self.writer.write_svg('disk_solution.svg', fig)

    def _plot_lens(self, radial: RadialSolution, barrier):
        grid = operator_map(radial, barrier, samples=self.config.maxprinciple.samples)
        fig, ax = new_figure()
        mesh = ax.pcolormesh(grid['t'], grid['d'], np.ma.masked_invalid(grid['normalized']), shading='nearest')
        fig.colorbar(mesh, ax=ax, label='(Δω + C0·U^e·ω) / (max(C0, 1)·U^e)')
        ax.set_yscale('log')
        ax.set_xlabel('(x₁ - λ) / (C_H·H)')
        ax.set_ylabel('d = 1 - |x_λ|')
        ax.set_title(f'λ = {barrier.lam:g}, μ = {barrier.mu:g}')
        self.writer.write_svg('barrier_operator.svg', fig)

    def _plot_symmetry(self, report):
        fig, ax = new_figure()
        r, defect = zip(*report.defect_by_radius)
        ax.semilogy(r, np.maximum(defect, 1e-300))
        ax.set_xlabel('r')
        ax.set_ylabel('max u - min u on the ring')
        self.writer.write_svg('symmetry.svg', fig)

    def _plot_euler(self, C0: float, interval, zeros: List[float]):
        fig, ax = new_figure()
        x = geometric_grid(interval[0], interval[1], 200)
        ax.semilogx(x, euler_solution(C0, x))
        if zeros:
            ax.semilogx(zeros, np.zeros(len(zeros)), 'o')
        ax.set_xlabel('x')
        self.writer.write_svg('euler_solution.svg', fig)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='blowup-lab',
        description="Blow-up Lab - numerical experiments on large solutions of Δu = f(u)"
    )

    parser.add_argument(
        'command',
        choices=COMMANDS,
        help='Pipeline to run'
    )

    parser.add_argument(
        '--config',
        type=str,
        help='Path to JSON config file (defaults apply to every missing key)'
    )

    parser.add_argument(
        '--out',
        type=str,
        help='Output directory (overrides output_dir)'
    )

    parser.add_argument(
        '--override',
        action='append',
        default=[],
        metavar='SECTION.KEY=VALUE',
        help='Patch one config value (repeatable)'
    )

    parser.add_argument(
        '--threads',
        type=int,
        help='Worker threads (or set BLOWUP_LAB_THREADS)'
    )

    parser.add_argument(
        '--verbose',
        action='store_true',
        help='Log every computation step'
    )

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for CLI"""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors, which is the hypotheses code here
        return EXIT_OK if e.code in (0, None) else EXIT_CONFIG

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(levelname)s %(name)s: %(message)s',
    )

    try:
        config = apply_overrides(load_config(args.config), args.override)
        threads = resolve_threads(args.threads)
    except ConfigError as e:
        print(f"❌ Config error: {e}")
        return EXIT_CONFIG

    print("=" * 60)
    print(f"BLOW-UP LAB - {args.command.upper()}")
    print("=" * 60)

    lab = None
    try:
        lab = BlowupLab(config, output_dir=args.out, threads=threads)
        code = lab.run(args.command)
    except ConfigError as e:
        print(f"❌ Config error: {e}")
        return EXIT_CONFIG
    except LabError as e:
        step = lab.step if lab is not None else 'setup'
        print(f"❌ Error in step '{step}': {type(e).__name__}: {e}")
        return EXIT_FAILURE

    print("\n" + "=" * 60)
    print(f"DONE - artifacts in {lab.writer.output_dir}")
    print("=" * 60)
    return code


if __name__ == "__main__":
    sys.exit(main())
