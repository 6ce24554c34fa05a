"""
LinAmalg command line
Batch front end: classification, saturation, amalgamation, joint embedding,
Fraisse chains, the brute-force oracles and the bundled fixtures
"""

import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import click
import colorlog
import ujson

from config import get_config_info, validate_config
from config.settings import AppConfig
from utils.algebra import FiniteAlgebra, counterexample, is_subalgebra
from utils.amalgam import (
    AmalgamationInput,
    amalgamate,
    amalgamate_hk,
    build_n_element,
    hk_signature,
    joint_embed,
    parse_policy,
    random_triple,
    search_amalgam_on_union,
    search_joint_embedding,
)
from utils.exceptions import ExceptionHandler, LinAmalgException, categorize_exception
from utils.file_handler import FileHandler
from utils.fixtures import FixtureSet
from utils.fraisse import check_step_witnesses, check_universality, generate_small_algebras, run_chain
from utils.report import ReportRecord
from utils.terms import EquationalTheory, Linearity, LinearTheory
from utils.theory_engine import SaturatedTheory, saturate

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_COLORS = {
    'DEBUG': 'cyan',
    'INFO': 'green',
    'WARNING': 'yellow',
    'ERROR': 'red',
    'CRITICAL': 'bold_red'
}


def setup_logging(level: str) -> None:
    """Colored console logging on stderr; stdout is reserved for reports"""
    handler = colorlog.StreamHandler()
    handler.setFormatter(colorlog.ColoredFormatter('%(log_color)s' + LOG_FORMAT, log_colors=LOG_COLORS))
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(level.upper())


@dataclass
class CliState:
    report_format: str
    budget: int
    seed: int
    files: FileHandler


def _state() -> CliState:
    return click.get_current_context().find_object(CliState)


def _emit(record: ReportRecord) -> None:
    click.echo(record.render(_state().report_format))
    click.get_current_context().exit(record.exit_code)


def _run(command: str, inputs: Dict[str, Any], body: Callable[[], ReportRecord]) -> None:
    """Run a command body, turning LinAmalg errors into error records with their exit codes"""
    try:
        record = body()
    except LinAmalgException as e:
        level = logging.ERROR if categorize_exception(e) == "internal" else logging.INFO
        logger.log(level, f"{command} failed: {ExceptionHandler.get_user_friendly_message(e)}")
        record = ReportRecord.from_exception(command, inputs, e)
    except Exception as e:
        record = ReportRecord.from_exception(command, inputs, e)
    _emit(record)


def _load_theory(path: str) -> EquationalTheory:
    return _state().files.load_theory(path)


def _saturated(theory: EquationalTheory) -> SaturatedTheory:
    return saturate(LinearTheory.from_theory(theory), _state().budget)


def _load_algebra(path: Optional[str], theory: EquationalTheory, hk: bool = False) -> Optional[FiniteAlgebra]:
    if path is None:
        return None
    signature = hk_signature(theory.signature) if hk else theory.signature
    return _state().files.load_algebra(path, signature)


def _write_witness(alg: FiniteAlgebra, out: Optional[str], canonical: bool) -> Optional[str]:
    if out is None:
        return None
    return str(_state().files.write_algebra(alg, out, canonical))


def _algebra_summary(alg: FiniteAlgebra) -> Dict[str, Any]:
    return {"size": alg.size, "carrier": list(alg.carrier), "verified": alg.verified}


policy_option = click.option('--policy', metavar='<fixed[:e]|max|fresh[:name]>', default=None,
                             help='Default value for unforced table entries')
out_option = click.option('--out', metavar='<path>', type=click.Path(dir_okay=False, writable=True),
                          default=None, help='Write the resulting algebra here')
canonical_option = click.option('--canonicalize', is_flag=True,
                                help='Emit files in sorted canonical order')
existing = click.Path(exists=True, dir_okay=False)


@click.group(context_settings=dict(
    max_content_width=999,
    help_option_names=['-h', '--help'],
))
@click.option('--report', 'report_format', type=click.Choice(['text', 'json']), default='text',
              show_default=True, help='Report format on stdout')
@click.option('--budget', type=int, metavar='<int>', default=None,
              help=f'Search budget (overrides ${AppConfig.ENV_BUDGET})')
@click.option('--seed', type=int, metavar='<int>', default=None,
              help=f'Random seed (overrides ${AppConfig.ENV_SEED})')
@click.option('--log-level', type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False),
              default=None, help=f'Log level (overrides ${AppConfig.ENV_LOG_LEVEL})')
@click.version_option(AppConfig.APP_VERSION, prog_name=AppConfig.APP_TITLE)
@click.pass_context
def cli(ctx, report_format, budget, seed, log_level):
    """LinAmalg: amalgamation in linear varieties"""
    setup_logging(log_level or AppConfig.log_level())
    ctx.obj = CliState(report_format, AppConfig.budget(budget), AppConfig.seed(seed), FileHandler())


@cli.command()
@click.argument('theory_file', type=existing)
def classify(theory_file):
    """Classify every axiom as nonlinear, linear or equilinear"""
    inputs = {"theory": theory_file}

    def body():
        theory = _load_theory(theory_file)
        rows = [f"{eq}  [{kind.value}]" for eq, kind in theory.classifications()]
        if theory.is_equilinear():
            overall = Linearity.EQUILINEAR.value
        elif theory.is_linear():
            overall = Linearity.LINEAR.value
        else:
            overall = Linearity.NONLINEAR.value
        return ReportRecord.success("classify", inputs, theory=overall, axioms=rows)

    _run("classify", inputs, body)


@cli.command(name='saturate')
@click.argument('theory_file', type=existing)
@out_option
@canonical_option
def saturate_cmd(theory_file, out, canonicalize):
    """Flat consequences: collapses and exceptional variables of every canonical pattern"""
    inputs = {"theory": theory_file}

    def body():
        sat = _saturated(_load_theory(theory_file))
        if sat.is_trivial():
            return ReportRecord.success("saturate", inputs, trivial=True)
        collapses = [f"{p} = {target}" for p, target in sat.collapse_table().items()]
        exceptional = [f"{p}: {{{', '.join(f'x{i}' for i in sorted(ex))}}}"
                       for p, ex in sat.exceptional_table().items() if ex]
        record = ReportRecord.success(
            "saturate", inputs, trivial=False,
            merged_constants=[" = ".join(group) for group in sat.merged_constant_classes() if len(group) > 1],
            collapses=collapses, exceptional=exceptional)
        if out is not None:
            record.witness_file = str(_state().files.write_theory(sat.as_theory(), out, canonicalize))
        return record

    _run("saturate", inputs, body)


@cli.command()
@click.argument('theory_file', type=existing)
@click.argument('algebra_file', type=existing)
@click.option('--sub', 'sub_file', type=existing, default=None,
              help='Also check that this algebra is a subalgebra')
def verify(theory_file, algebra_file, sub_file):
    """Check that an algebra is a model, and optionally that another is its subalgebra"""
    inputs = {"theory": theory_file, "algebra": algebra_file, "sub": sub_file}

    def body():
        theory = _load_theory(theory_file)
        alg = _load_algebra(algebra_file, theory)
        failures = []
        for eq in theory.axioms:
            bad = counterexample(alg, eq)
            if bad is not None:
                failures.append(f"{eq} fails at {bad}")
        if sub_file is not None:
            sub = _load_algebra(sub_file, theory)
            if not is_subalgebra(sub, alg):
                failures.append(f"{sub_file} is not a subalgebra of {algebra_file}")
        if failures:
            return ReportRecord.refuted("verify", inputs, failures=failures)
        return ReportRecord.success("verify", inputs, size=alg.size, axioms=len(theory.axioms))

    _run("verify", inputs, body)


@cli.command(name='amalgamate')
@click.argument('theory_file', type=existing)
@click.argument('a_file', type=existing)
@click.argument('b_file', type=existing)
@click.argument('c_file', type=existing, required=False)
@policy_option
@out_option
@canonical_option
def amalgamate_cmd(theory_file, a_file, b_file, c_file, policy, out, canonicalize):
    """Strong amalgam of A and B over C (omit C for the empty common part)"""
    inputs = {"theory": theory_file, "A": a_file, "B": b_file, "C": c_file, "policy": policy}

    def body():
        theory = _load_theory(theory_file)
        inp = AmalgamationInput(_load_algebra(a_file, theory), _load_algebra(b_file, theory),
                                _load_algebra(c_file, theory))
        D = amalgamate(_saturated(theory), inp, parse_policy(policy))
        record = ReportRecord.success("amalgamate", inputs, **_algebra_summary(D))
        record.witness_file = _write_witness(D, out, canonicalize)
        return record

    _run("amalgamate", inputs, body)


@cli.command()
@click.argument('theory_file', type=existing)
@click.argument('a_file', type=existing)
@click.argument('b_file', type=existing)
@policy_option
@out_option
@canonical_option
def jep(theory_file, a_file, b_file, policy, out, canonicalize):
    """Joint embedding of A and B"""
    inputs = {"theory": theory_file, "A": a_file, "B": b_file, "policy": policy}

    def body():
        theory = _load_theory(theory_file)
        D = joint_embed(_saturated(theory), _load_algebra(a_file, theory), _load_algebra(b_file, theory),
                        parse_policy(policy))
        record = ReportRecord.success("jep", inputs, **_algebra_summary(D))
        record.witness_file = _write_witness(D, out, canonicalize)
        return record

    _run("jep", inputs, body)


@cli.command(name='build-n')
@click.argument('theory_file', type=existing)
@click.argument('n', type=click.IntRange(min=1))
@policy_option
@out_option
@canonical_option
def build_n(theory_file, n, policy, out, canonicalize):
    """A model with exactly n elements"""
    inputs = {"theory": theory_file, "n": n, "policy": policy}

    def body():
        theory = _load_theory(theory_file)
        D = build_n_element(_saturated(theory), n, parse_policy(policy) if policy else None)
        record = ReportRecord.success("build-n", inputs, **_algebra_summary(D))
        record.witness_file = _write_witness(D, out, canonicalize)
        return record

    _run("build-n", inputs, body)


@cli.command(name='amalgamate-hk')
@click.argument('theory_file', type=existing)
@click.argument('a_file', type=existing)
@click.argument('b_file', type=existing)
@click.argument('c_file', type=existing, required=False)
@click.option('--respect', metavar='<f,g,...>', default='',
              help='Operations h is a homomorphism for')
@out_option
@canonical_option
def amalgamate_hk_cmd(theory_file, a_file, b_file, c_file, respect, out, canonicalize):
    """Amalgamate algebras carrying a bijection h with inverse k"""
    respected = [op.strip() for op in respect.split(',') if op.strip()]
    inputs = {"theory": theory_file, "A": a_file, "B": b_file, "C": c_file, "respect": respected}

    def body():
        theory = _load_theory(theory_file)
        inp = AmalgamationInput(_load_algebra(a_file, theory, hk=True), _load_algebra(b_file, theory, hk=True),
                                _load_algebra(c_file, theory, hk=True))
        D = amalgamate_hk(_saturated(theory), inp, respected)
        record = ReportRecord.success("amalgamate-hk", inputs, **_algebra_summary(D))
        record.witness_file = _write_witness(D, out, canonicalize)
        return record

    _run("amalgamate-hk", inputs, body)


@cli.command()
@click.argument('theory_file', type=existing)
@click.option('--max-seed-size', type=click.IntRange(min=1), default=2, show_default=True,
              help='Largest generated seed algebra')
@click.option('--steps', type=click.IntRange(min=0), default=5, show_default=True,
              help='Number of chain steps')
@click.option('--out-dir', type=click.Path(file_okay=False, writable=True), default=None,
              help='Write every stage and the chain log here')
@canonical_option
def fraisse(theory_file, max_seed_size, steps, out_dir, canonicalize):
    """Iterated amalgamation over the small algebras of the theory"""
    inputs = {"theory": theory_file, "max_seed_size": max_seed_size, "steps": steps}

    def body():
        sat = _saturated(_load_theory(theory_file))
        seeds = generate_small_algebras(sat, max_seed_size, budget=_state().budget)
        chain = run_chain(sat, seeds, steps)
        universality = check_universality(chain.final, seeds)
        witnesses = check_step_witnesses(chain)
        record = ReportRecord.success(
            "fraisse", inputs,
            seeds=[f"{s.name} ({s.size})" for s in seeds],
            stage_sizes=[stage.size for stage in chain.stages],
            steps=[f"{e.step}: {e.action} {e.target}" for e in chain.log],
            missing=universality.missing,
            witnesses_ok=all(ok for _, ok in witnesses))
        if out_dir is not None:
            directory = Path(out_dir)
            for i, stage in enumerate(chain.stages):
                _state().files.write_algebra(stage, directory / f"stage{i}.alg", canonicalize)
            log_path = directory / "chain.jsonl"
            log_path.write_text("".join(ujson.dumps(e.to_dict()) + "\n" for e in chain.log), encoding="utf-8")
            record.witness_file = str(directory)
        if universality.missing:
            record.verdict, record.exit_code = "refuted", 1
        return record

    _run("fraisse", inputs, body)


@cli.command(name='search-amalgam')
@click.argument('theory_file', type=existing)
@click.argument('a_file', type=existing)
@click.argument('b_file', type=existing)
@click.argument('c_file', type=existing, required=False)
@out_option
@canonical_option
def search_amalgam(theory_file, a_file, b_file, c_file, out, canonicalize):
    """Exhaustive search for a model on A ∪ B extending A and B (any theory)"""
    inputs = {"theory": theory_file, "A": a_file, "B": b_file, "C": c_file}

    def body():
        theory = _load_theory(theory_file)
        inp = AmalgamationInput(_load_algebra(a_file, theory), _load_algebra(b_file, theory),
                                _load_algebra(c_file, theory))
        D = search_amalgam_on_union(theory, inp, _state().budget)
        if D is None:
            return ReportRecord.refuted("search-amalgam", inputs, message="no amalgam on the union")
        record = ReportRecord.success("search-amalgam", inputs, **_algebra_summary(D))
        record.witness_file = _write_witness(D, out, canonicalize)
        return record

    _run("search-amalgam", inputs, body)


@cli.command(name='search-jep')
@click.argument('theory_file', type=existing)
@click.argument('a_file', type=existing)
@click.argument('b_file', type=existing)
@click.option('--max-size', type=click.IntRange(min=1), default=4, show_default=True,
              help='Largest candidate size')
@out_option
@canonical_option
def search_jep(theory_file, a_file, b_file, max_size, out, canonicalize):
    """Scan all small models for one that both A and B embed into (any theory)"""
    inputs = {"theory": theory_file, "A": a_file, "B": b_file, "max_size": max_size}

    def body():
        theory = _load_theory(theory_file)
        witness = search_joint_embedding(theory, _load_algebra(a_file, theory), _load_algebra(b_file, theory),
                                         max_size, _state().budget)
        if witness is None:
            return ReportRecord.refuted("search-jep", inputs, message=f"no joint embedding up to size {max_size}")
        record = ReportRecord.success("search-jep", inputs, embed_A=witness.embed_A, embed_B=witness.embed_B,
                                      **_algebra_summary(witness.D))
        record.witness_file = _write_witness(witness.D, out, canonicalize)
        return record

    _run("search-jep", inputs, body)


@cli.command(name='random-sap')
@click.argument('theory_file', type=existing)
@click.argument('c_file', type=existing)
@click.option('--trials', type=click.IntRange(min=1), default=AppConfig.RANDOM_TRIPLES_PER_VARIETY,
              show_default=True, help='Number of random triples')
@click.option('--max-size', type=click.IntRange(min=1), default=4, show_default=True,
              help='Largest size of A and B')
def random_sap(theory_file, c_file, trials, max_size):
    """Amalgamate random extensions of C and count failures"""
    inputs = {"theory": theory_file, "C": c_file, "trials": trials, "seed": _state().seed}

    def body():
        theory = _load_theory(theory_file)
        C = _load_algebra(c_file, theory)
        sat = _saturated(theory)
        rng = random.Random(_state().seed)
        built, skipped, failures = 0, 0, []
        for trial in range(trials):
            inp = random_triple(theory, C, rng, max_size)
            if inp is None:
                skipped += 1
                continue
            D = amalgamate(sat, inp)
            if D.verified is False or not (is_subalgebra(inp.A, D) and is_subalgebra(inp.B, D)):
                failures.append(trial)
            built += 1
        if failures:
            return ReportRecord.refuted("random-sap", inputs, built=built, failures=failures)
        return ReportRecord.success("random-sap", inputs, built=built, skipped=skipped)

    _run("random-sap", inputs, body)


@cli.command()
def info():
    """Configuration summary and fixture availability"""
    inputs: Dict[str, Any] = {}

    def body():
        config_errors = validate_config()
        fixtures = FixtureSet()
        missing = [name for name in fixtures.names() if not (fixtures.root / name).is_dir()]
        record = ReportRecord.success("info", inputs, config=get_config_info(), config_errors=config_errors,
                                      missing_fixtures=missing)
        if config_errors or missing:
            record.verdict, record.exit_code = "refuted", 1
        return record

    _run("info", inputs, body)


@cli.command()
@click.argument('name', required=False)
@click.option('--list', 'list_only', is_flag=True, help='List the bundled fixtures')
def fixture(name, list_only):
    """Run a bundled fixture against its documented expectation"""
    fixtures = FixtureSet()
    inputs = {"name": name}

    def body():
        if list_only or name is None:
            rows: List[str] = [f"{n}: {fixtures.get(n).expectation} - {fixtures.get(n).description}"
                               for n in fixtures.names()]
            return ReportRecord.success("fixture", inputs, fixtures=rows)
        result = fixtures.run(name, _state().budget)
        details = result.to_dict()
        if result.passed:
            return ReportRecord.success("fixture", inputs, **details)
        return ReportRecord.refuted("fixture", inputs, **details)

    _run("fixture", inputs, body)


def main():
    cli()


if __name__ == "__main__":
    main()
