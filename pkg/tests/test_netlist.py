import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import composer
from marblesim import (Circuit, ElaborationError, GateMacro, NodeKind,
                       ParseError, circuit_to_ast, elaborate, get_macro,
                       parse, print_canonical, validate)

class TestParse:
    def test_fixture_structure(self, fixtures):
        ast = parse((fixtures / "and_gate.mnl").read_text())
        assert ast.name == "and_primitive"
        assert ast.inputs == ("a", "b")
        assert ast.outputs == ("y",)
        kinds = {nd.name: nd.kind for nd in ast.nodes}
        assert kinds == {"J": NodeKind.JUNCTION, "S": NodeKind.SCALPEL,
                         "M": NodeKind.JOIN, "W": NodeKind.WASTE}
        assert len(ast.channels) == 10
        assert not ast.gates

    def test_messy_formatting_parses_to_same_circuit(self, fixtures):
        clean = parse((fixtures / "and_gate.mnl").read_text())
        messy = parse((fixtures / "and_gate_messy.mnl").read_text())
        assert clean == messy
        assert clean.canonical_key() == messy.canonical_key()

    def test_hold_argument(self):
        ast = parse("circuit c\ninput a\noutput y\nnode H : hold(3)\n"
                    "connect a -> H.in\nconnect H.out -> y\n")
        (decl,) = ast.nodes
        assert decl.kind is NodeKind.HOLD
        assert decl.hold_phases == 3

    def test_gate_declaration(self):
        ast = parse("circuit c\ninput a, b\noutput y\ngate G : AND\n"
                    "connect a -> G.a\nconnect b -> G.b\n"
                    "connect G.y -> y\n")
        (gd,) = ast.gates
        assert (gd.name, gd.macro) == ("G", "AND")

    def test_line_tracking(self):
        ast = parse("circuit c\n\ninput a\noutput y\n\nnode H : hold(1)\n"
                    "connect a -> H.in\nconnect H.out -> y\n")
        (decl,) = ast.nodes
        assert decl.line == 6
        assert {ch.line for ch in ast.channels} == {7, 8}


class TestParseErrors:
    @pytest.mark.parametrize("source,line,fragment", [
        ("input a\ncircuit c\n", 1, "circuit"),
        ("circuit c\ncircuit d\n", 2, "circuit"),
        ("circuit 9lives\n", 1, "invalid circuit name"),
        ("circuit c\ninput a\ninput a\n", 3, "duplicate"),
        ("circuit c\nnode J : junction\nnode J : scalpel\n", 3, "duplicate"),
        ("circuit c\nnode J : gearbox\n", 2, "unknown node kind"),
        ("circuit c\nnode H : hold\n", 2, "hold"),
        ("circuit c\nnode H : hold(0)\n", 2, "at least 1"),
        ("circuit c\ninput a\nconnect a ->\n", 3, "endpoint"),
        ("circuit c\ninput a\nconnect a\n", 3, "->"),
        ("circuit c\ninput a\noutput y\nconnect a.out -> y\n", 4, "bare"),
        ("circuit c\ninput a\noutput y\nconnect a -> ghost.in\n", 4,
         "unknown name"),
        ("circuit c\nnode J : junction\nconnect J -> J.A\n", 3, "port"),
        ("circuit c\nwobble foo\n", 2, "statement"),
    ])
    def test_position_and_message(self, source, line, fragment):
        with pytest.raises(ParseError) as err:
            parse(source)
        assert err.value.line == line
        assert fragment in str(err.value)

    def test_column_points_at_offender(self):
        with pytest.raises(ParseError) as err:
            parse("circuit c\nnode J : gearbox\n")
        assert err.value.col == 10


class TestCanonicalPrint:
    def test_roundtrip_identity(self, fixtures):
        for name in ("and_gate.mnl", "and_gate_messy.mnl", "skew.mnl",
                     "full_adder.mnl"):
            ast = parse((fixtures / name).read_text())
            printed = print_canonical(ast)
            again = parse(printed)
            assert again == ast
            assert print_canonical(again) == printed

    def test_output_is_sorted_and_terminated(self):
        ast = parse("circuit c\ninput b, a\noutput y\nnode M : join\n"
                    "connect b -> M.in2\nconnect a -> M.in1\n"
                    "connect M.out -> y\n")
        printed = print_canonical(ast)
        assert printed.endswith("\n")
        lines = printed.splitlines()
        assert lines[0] == "circuit c"
        assert lines[1] == "input b, a"
        connects = [ln for ln in lines if ln.startswith("connect")]
        assert connects == sorted(connects)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=10 ** 6))
    def test_roundtrip_over_generated_circuits(self, seed):
        source = composer.compose_source(seed)
        ast = parse(source)
        assert parse(print_canonical(ast)) == ast


class TestValidate:
    def check(self, source, fragment):
        diags = validate(parse(source))
        assert any(fragment in d.message for d in diags), diags

    def test_clean_fixture_has_no_diagnostics(self, fixtures):
        assert validate(parse((fixtures / "and_gate.mnl").read_text())) == []

    def test_unknown_macro(self):
        self.check("circuit c\ninput a\noutput y\ngate G : FROBNICATE\n"
                   "connect a -> G.a\nconnect G.y -> y\n", "unknown gate")

    def test_reserved_macro_name(self):
        self.check("circuit c\ninput a, b\noutput y\nnode AND : junction\n"
                   "connect a -> AND.A\nconnect b -> AND.B\n"
                   "connect AND.O3 -> y\nconnect AND.O1 -> y\n", "reserved")

    def test_unconnected_junction_port(self):
        self.check("circuit c\ninput a, b\noutput y\nnode J : junction\n"
                   "connect a -> J.A\nconnect b -> J.B\n"
                   "connect J.O3 -> y\n", "unconnected port J.O1")

    def test_double_drive(self):
        self.check("circuit c\ninput a, b\noutput y\nnode W : waste\n"
                   "connect a -> y\nconnect b -> y\nconnect a -> W.in\n",
                   "multiple channels")

    def test_join_needs_two_inputs(self):
        self.check("circuit c\ninput a\noutput y\nnode M : join\n"
                   "connect a -> M.in1\nconnect M.out -> y\n",
                   "at least two")

    def test_join_ports_contiguous(self):
        self.check("circuit c\ninput a, b\noutput y\nnode M : join\n"
                   "connect a -> M.in1\nconnect b -> M.in3\n"
                   "connect M.out -> y\n", "contiguous")

    def test_waste_accepts_many(self):
        source = ("circuit c\ninput a, b\noutput y\nnode W : waste\n"
                  "node T : tap\n"
                  "connect a -> W.in\nconnect b -> T.in\n"
                  "connect T.out -> W.in\nconnect T.copy -> y\n")
        assert validate(parse(source)) == []

    def test_unknown_port(self):
        self.check("circuit c\ninput a\noutput y\nnode S : scalpel\n"
                   "connect a -> S.mouth\nconnect S.out1 -> y\n"
                   "connect S.out2 -> y\n", "unknown port S.mouth")

    def test_cycle_detected(self):
        self.check("circuit c\ninput a\noutput y\n"
                   "node M : join\nnode T : tap\n"
                   "connect a -> M.in1\nconnect M.out -> T.in\n"
                   "connect T.out -> M.in2\nconnect T.copy -> y\n",
                   "cycle detected")


class TestElaborate:
    def test_primitive_circuit_passes_through(self, fixtures):
        circuit = elaborate(parse((fixtures / "and_gate.mnl").read_text()))
        assert isinstance(circuit, Circuit)
        assert set(circuit.nodes) == {"a", "b", "y", "J", "S", "M", "W"}
        assert circuit.phases["J"] == 1
        assert circuit.phases["S"] == 2
        assert circuit.phases["M"] == 3
        assert circuit.phases["y"] == 4

    def test_macro_expansion_renames_hygienically(self):
        circuit = elaborate(get_macro("NAND").expansion)
        assert "G1.J" in circuit.nodes
        assert "G2.C" in circuit.nodes
        assert not any("." not in name for name in circuit.nodes
                       if circuit.nodes[name].kind is NodeKind.JUNCTION)

    def test_const_path_gets_hold(self):
        circuit = elaborate(get_macro("NAND").expansion)
        sync = circuit.nodes["G2.J.B.sync"]
        assert sync.kind is NodeKind.HOLD
        assert sync.hold_phases == 3
        assert circuit.phases["G2.J.B.sync"] == 3
        assert circuit.phases["G2.J"] == 4

    def test_fredkin_direct_phase_oracle(self):
        circuit = elaborate(get_macro("FREDKIN_DIRECT").expansion)
        assert circuit.phases == {
            "u": 0, "x1": 0, "x2": 0,
            "J1": 1, "S1": 2, "M": 3, "J2.B.sync": 3, "J2": 4,
            "S2": 5, "MY1": 5, "MV": 6, "MY2": 6,
            "y1": 6, "v": 7, "y2": 7,
        }

    def test_strict_raises_on_imbalance(self, fixtures):
        ast = parse((fixtures / "skew.mnl").read_text())
        with pytest.raises(ElaborationError) as err:
            elaborate(ast, strict=True, insert_holds=False)
        assert "J2" in str(err.value)

    def test_insert_holds_false_keeps_imbalance(self, fixtures):
        ast = parse((fixtures / "skew.mnl").read_text())
        circuit = elaborate(ast, insert_holds=False)
        assert "J2.A.sync" not in circuit.nodes
        arrival_a = circuit.phases["J1"] + 1
        assert arrival_a != circuit.phases["J2"]

    def test_inserted_hold_balances(self, fixtures):
        ast = parse((fixtures / "skew.mnl").read_text())
        circuit = elaborate(ast)
        sync = circuit.nodes["J2.A.sync"]
        assert sync.kind is NodeKind.HOLD
        assert sync.hold_phases == 2
        assert circuit.phases["J2.A.sync"] + 1 == circuit.phases["J2"]

    def test_elaboration_is_idempotent(self, fixtures):
        first = elaborate(parse((fixtures / "full_adder.mnl").read_text()))
        second = elaborate(circuit_to_ast(first))
        assert second.phases == first.phases
        assert set(second.nodes) == set(first.nodes)
        assert sorted(ch.key() for ch in second.channels) == \
            sorted(ch.key() for ch in first.channels)

    def test_validation_failures_surface_as_elaboration_errors(self):
        ast = parse("circuit c\ninput a\noutput y\ngate G : FROBNICATE\n"
                    "connect a -> G.a\nconnect G.y -> y\n")
        with pytest.raises(ElaborationError):
            elaborate(ast)

    def test_expansion_limit_stops_recursive_macros(self):
        inner = parse("circuit loop_body\ninput a\noutput y\n"
                      "gate G : LOOP\nconnect a -> G.a\n"
                      "connect G.y -> y\n")
        loop = GateMacro("LOOP", ("a",), ("y",), inner,
                         lambda bits: bits, False, False)
        user = parse("circuit c\ninput a\noutput y\ngate G : LOOP\n"
                     "connect a -> G.a\nconnect G.y -> y\n")
        with pytest.raises(ElaborationError) as err:
            elaborate(user, library={"LOOP": loop})
        assert "expansion" in str(err.value)

    def test_every_library_macro_elaborates_clean(self):
        from marblesim import library, timing_lint
        for macro in library():
            circuit = elaborate(macro.expansion)
            assert circuit.inputs == macro.inputs
            assert circuit.outputs == macro.outputs
            assert timing_lint(circuit) == ()
