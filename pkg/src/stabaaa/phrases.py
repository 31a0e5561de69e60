"""
Command-line texts for stabaaa.

This module contains the help strings and notices printed by the command line.
"""

cli_help = """
Fit stable rational models to frequency-response samples.

Input files are CSV with the header freq,re,im. Models are written as versioned JSON
in normalized coordinates together with their normalization record.
"""

fit_help = "Fit a model to INPUT_CSV and write model, stability, metrics and plot data."
eval_help = "Evaluate a model JSON on the frequencies of FREQS_CSV or on a log-spaced grid."
poles_help = "Write the pole/zero map of a model JSON as JSON and CSV."
compare_help = "Run several algorithms on INPUT_CSV concurrently and tabulate their metrics."
export_help = "Convert a model JSON to pole-residue form, or dump its stability program in SDPA format."

tol_help = "Target max-abs error on the normalized data."
theta_help = "Tolerance decreasing factor between stabAAA rounds, in (0, 1)."
mmax_help = "Maximum number of stabAAA retries after the first round."
max_order_help = "Upper bound on the number of AAA support points."
restart_help = "Restart AAA from scratch in each stabAAA round instead of resuming."
sdpa_help = "Dataset CSV the model was fitted on; writes the stability program instead of pole-residue JSON."

tolerance_not_met_text = (
    "The fitted model does not meet the requested tolerance {eps:g} (E_inf = {e_inf:.3e}). "
    "Increase --mmax, loosen --tol or raise --max-order."
)
unstable_model_text = "The model has {count} unstable pole(s); see {path}."
