"""Local stability under minimal linguistic perturbations.

Pairs that differ only by a determiner swap, a tense shift, a synonym and
so on should stay above the high-confidence threshold. The bundled
35-pair fixture exercises the protocol end to end, raw and calibrated
(each side evaluated against its own threshold).
"""

from pathlib import Path

from simcal.calibrators import apply, fit_isotonic
from simcal.metrics import read_pairs
from simcal.stability import bundled_fixture_path, evaluate_stability, load_perturbation_dataset
from simcal.thresholds import hcs_threshold

root = Path(__file__).resolve().parent.parent
reference = read_pairs(root / "data" / "reference_pairs.jsonl")
model = fit_isotonic(reference)
tau_raw = hcs_threshold(reference).value
tau_cal = apply(model, tau_raw)

perturbed = load_perturbation_dataset(bundled_fixture_path())

print(evaluate_stability(perturbed, None, tau_raw).to_text())
print(evaluate_stability(perturbed, model, tau_cal).to_text())
print(f"thresholds: raw {tau_raw:.3f} -> calibrated {tau_cal:.3f} (its monotone image)")
