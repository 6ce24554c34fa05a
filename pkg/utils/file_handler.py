"""
LinAmalg file handling
Line-oriented theory and algebra files: parsing, validation and canonical output
"""

import itertools
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from config.settings import AppConfig
from utils.algebra import FiniteAlgebra
from utils.exceptions import LinAmalgException, ParseException, SignatureMismatchException
from utils.terms import (
    Application,
    EquationalTheory,
    Signature,
    Variable,
    parse_equation,
    parse_signature,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class FileHandler:
    """Reads and writes theory / algebra files"""

    def __init__(self):
        self.config = AppConfig()
        self.max_size_mb = self.config.FILE_SIZE_LIMIT_MB

    def validate_file(self, path: PathLike) -> Tuple[bool, str]:
        """
        Check that an input file can be read

        Args:
            path: file path

        Returns:
            Tuple[bool, str]: (valid, error message)
        """
        path = Path(path)
        if not path.is_file():
            return False, f"no such file: {path}"
        size_mb = path.stat().st_size / (1024 * 1024)
        if size_mb > self.max_size_mb:
            return False, f"{path} is larger than {self.max_size_mb}MB"
        return True, ""

    def read_text(self, path: PathLike) -> str:
        ok, error = self.validate_file(path)
        if not ok:
            raise ParseException(error, source=str(path))
        raw = Path(path).read_bytes()
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            logger.warning(f"{path} is not UTF-8, reading as latin-1")
            return raw.decode("latin-1")

    @staticmethod
    def _lines(text: str):
        for no, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield no, line

    # -- theories ----------------------------------------------------------

    def parse_theory(self, text: str, source: str = "<theory>") -> EquationalTheory:
        """
        Parse `signature:` followed by an `axioms:` block

        Returns:
            EquationalTheory: axioms may be nonlinear at this stage
        """
        signature: Optional[Signature] = None
        axioms = []
        in_axioms = False
        for no, line in self._lines(text):
            try:
                if line.startswith("signature:"):
                    signature = parse_signature(line[len("signature:"):])
                    in_axioms = False
                elif line.startswith("axioms:"):
                    if signature is None:
                        raise ParseException("axioms before signature", no, source)
                    in_axioms = True
                    rest = line[len("axioms:"):].strip()
                    if rest:
                        axioms.append(parse_equation(rest, signature))
                elif in_axioms:
                    axioms.append(parse_equation(line, signature))
                else:
                    raise ParseException(f"unexpected line {line!r}", no, source)
            except ParseException as e:
                if e.details.get("line"):
                    raise
                raise ParseException(e.message, no, source)
            except SignatureMismatchException as e:
                raise ParseException(e.message, no, source)
        if signature is None:
            raise ParseException("missing signature: line", source=source)
        logger.debug(f"parsed theory {source}: {len(axioms)} axioms over {signature}")
        return EquationalTheory(signature, tuple(axioms))

    def load_theory(self, path: PathLike) -> EquationalTheory:
        return self.parse_theory(self.read_text(path), str(path))

    def format_theory(self, theory: EquationalTheory, canonical: bool = False) -> str:
        axioms = [str(eq) for eq in theory.axioms]
        if canonical:
            axioms = sorted(set(axioms))
        return "\n".join([f"signature: {theory.signature}", "axioms:"] + axioms) + "\n"

    # -- algebras ----------------------------------------------------------

    def parse_algebra(self, text: str, source: str = "<algebra>",
                      signature: Optional[Signature] = None) -> FiniteAlgebra:
        """
        Parse `elements:`, `const 'c = e` and `table f:` blocks

        Args:
            text: file contents
            source: name used in error messages
            signature: expected signature (inferred from the file when omitted)

        Returns:
            FiniteAlgebra
        """
        carrier: List[str] = []
        constants: Dict[str, str] = {}
        entries: Dict[str, Dict[Tuple[str, ...], str]] = {}
        arities: Dict[str, int] = {}
        current: Optional[str] = None

        for no, line in self._lines(text):
            if line.startswith("elements:"):
                carrier = line[len("elements:"):].replace(",", " ").split()
                if len(set(carrier)) != len(carrier):
                    raise ParseException("duplicate element names", no, source)
                current = None
            elif line.startswith("const "):
                body = line[len("const "):]
                name, _, value = body.partition("=")
                name, value = name.strip(), value.strip()
                if not name.startswith("'") or not value:
                    raise ParseException(f"expected const 'c = e, got {line!r}", no, source)
                constants[name[1:]] = value
                current = None
            elif line.startswith("table ") and line.endswith(":"):
                current = line[len("table "):-1].strip()
                if current in entries:
                    raise ParseException(f"second table for {current}", no, source)
                entries[current] = {}
            elif current is not None:
                try:
                    eq = parse_equation(line)
                except ParseException as e:
                    raise ParseException(e.message, no, source)
                lhs, rhs = eq.lhs, eq.rhs
                if not isinstance(lhs, Application) or lhs.op != current or not isinstance(rhs, Variable) \
                        or not all(isinstance(a, Variable) for a in lhs.args):
                    raise ParseException(f"expected {current}(e1,...,en) = e, got {line!r}", no, source)
                args = tuple(a.name for a in lhs.args)
                if arities.setdefault(current, len(args)) != len(args):
                    raise ParseException(f"{current} used with {len(args)} arguments", no, source)
                if args in entries[current] and entries[current][args] != rhs.name:
                    raise ParseException(f"conflicting entries for {current}{args}", no, source)
                entries[current][args] = rhs.name
            else:
                raise ParseException(f"unexpected line {line!r}", no, source)

        if not carrier:
            raise ParseException("missing elements: line", source=source)
        members = set(carrier)
        for op, table in entries.items():
            if op not in arities:
                raise ParseException(f"table {op} is empty", source=source)
            for args, value in table.items():
                unknown = [e for e in args + (value,) if e not in members]
                if unknown:
                    raise ParseException(f"table {op} mentions unknown elements {unknown}", source=source)
            for combo in itertools.product(carrier, repeat=arities[op]):
                if combo not in table:
                    raise ParseException(f"table {op} is partial: no entry for {op}({','.join(combo)})",
                                         source=source)
        inferred = Signature(arities, constants)
        if signature is not None and signature != inferred:
            raise SignatureMismatchException(f"{source} is over {inferred}, expected {signature}")
        try:
            return FiniteAlgebra.from_entries(inferred, carrier, entries, constants, name=Path(source).stem)
        except LinAmalgException as e:
            raise ParseException(e.message, source=source)

    def load_algebra(self, path: PathLike, signature: Optional[Signature] = None) -> FiniteAlgebra:
        return self.parse_algebra(self.read_text(path), str(path), signature)

    def format_algebra(self, alg: FiniteAlgebra, canonical: bool = False) -> str:
        if canonical:
            alg = alg.canonical()
        lines = [f"elements: {' '.join(alg.carrier)}"]
        lines += [f"const '{c} = {alg.const(c)}" for c in alg.signature.sorted_constants()]
        for op in alg.signature.op_names:
            lines.append(f"table {op}:")
            lines += [f"{op}({','.join(args)}) = {value}" for args, value in alg.entries(op)]
        return "\n".join(lines) + "\n"

    def write_algebra(self, alg: FiniteAlgebra, path: PathLike, canonical: bool = False) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.format_algebra(alg, canonical), encoding="utf-8")
        logger.info(f"wrote {alg.size}-element algebra to {path}")
        return path

    def write_theory(self, theory: EquationalTheory, path: PathLike, canonical: bool = False) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.format_theory(theory, canonical), encoding="utf-8")
        return path
