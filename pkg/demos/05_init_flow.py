"""Run the committed boot-to-guest scenario and print what each stage denied."""

from pathlib import Path

from wgsim import parse_scenario, run_scenario

path = Path(__file__).resolve().parent.parent / "scenarios" / "init_flow.wgs"
report = run_scenario(parse_scenario(path.read_text()))
for step in report.steps:
    if step.observed.startswith("deny"):
        print(f"line {step.line:3d}  {step.statement:<50} {step.observed}")
print({k: v for k, v in report.counters.items() if k.startswith("denials.") and v})
print("overall:", "PASS" if report.passed else "FAIL")
