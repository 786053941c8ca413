from .core import (
    DeltaClass,
    ProofBuilder,
    ProofLine,
    ProofObject,
    ProofVerdict,
    SpecialSequence,
    Theory,
    belongs_to,
    check_proof,
    classify_delta,
    deduction_transform,
    extract_special_sequence,
    in_delta,
    is_default_formula,
    match_instance,
    proves,
    purge_extraneous,
    sequence_valid,
)
from .proofgen import (
    equality_substitution,
    equality_theorem_proof,
    freeze_proof,
    negation_form_proof,
    prenex_equivalence_proof,
    special_case_proof,
    variant_iff_proof,
)
from .scripts import (
    CorpusReport,
    Entry,
    Registry,
    Script,
    ScriptVerdict,
    UseLine,
    bsi_template,
    check_script,
    check_scripts,
    elaborate_citation,
    parse_script_file,
)
