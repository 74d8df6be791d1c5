"""Regenerate the single-fault mutant fixtures from the clean corpus models.

Each mutant applies one textual edit and must produce exactly one error
code. The first line of every fixture names that code; tests read it back.
"""

from _common import CORPUS

# (file stem, expected code, source model, old text, new text, description)
MUTANTS = [
    ('bad_depth','E001','stamp','root stamp : Stamp','variant HeavyStampCylinder of StampCylinder {\n    attr dummy : INT = 0\n}\n\nroot stamp : Stamp','a variant of a variant'),
    ('component_part','E002','stamp','block AnalogSensor kind component input INT {}','block AnalogSensor kind component input INT {\n    part probe : BinarySensor\n}','a component declaring a part'),
    ('component_function','E002','fam','block Button kind component input BOOL {}','block Button kind component input BOOL {\n    function press()\n}','a component declaring a function'),
    ('undeclared_lane','E003','stamp','lanes self, stampCylinder, transportCylinder, workpieceSensor, warningLamp','lanes self, stampCylinder, transportCylinder, workpieceSensor','a node writes a part missing from the lanes'),
    ('foreign_lane','E003','fam','lanes classic, third\n','lanes classic, third, fourth\n','a lane that is not a part'),
    ('outside_write','E004','fam','node b : call third.blink()','node b : set third.blinks := 0','writing a non-Signal attribute of a part'),
    ('deep_access','E005','stamp','node back : call transportCylinder.retract()','node back : call transportCylinder.valveExtend.setSignal(FALSE)','calling through two part levels'),
    ('arith_condition','E006','stamp','wait -> feed when workpieceSensor.Signal == TRUE','wait -> feed when self.cycles + 1 > 3','arithmetic inside a condition'),
    ('literal_left','E006','fam','down -> end when self.blinks >= self.limit','down -> end when 3 <= self.limit','a literal on the left of a comparison'),
    ('no_start','E007','stamp','        start -> wait\n','','a diagram without a start transition'),
    ('policy_on_set','E007','stamp','wait -> feed when workpieceSensor.Signal == TRUE','wait -> feed when workpieceSensor.Signal == TRUE policy resume','a policy on an attribute node'),
    ('bool_to_int','E008','stamp','node count : set self.cycles := self.cycles + 1','node count : set self.cycles := TRUE','assigning BOOL to INT'),
    ('call_arity','E008','stamp','node press : call stampCylinder.press(self.pressure)','node press : call stampCylinder.press()','calling with too few arguments'),
]


def main() -> None:
    sources = {"stamp": (CORPUS / "stamp" / "stamp.modat").read_text(encoding="utf-8"),
               "fam": (CORPUS / "family" / "family.modat").read_text(encoding="utf-8")}
    (CORPUS / "mutants").mkdir(exist_ok=True)
    for name, code, src, old, new, desc in MUTANTS:
        text = sources[src]
        if old not in text:
            raise SystemExit(f"{name}: anchor text not found")
        body = f"// Single-fault mutant: {desc}. Expected diagnostic: {code}.\n" + text.replace(old, new, 1)
        path = CORPUS / ("bad_depth.modat" if name == "bad_depth" else f"mutants/{name}.modat")
        path.write_text(body, encoding="utf-8")
        print(f"{code} {path.relative_to(CORPUS)}")


if __name__ == "__main__":
    main()
