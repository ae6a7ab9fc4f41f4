"""
The Socratic Constraint Layer
=============================

Provocations are the system's only voice: short nudges that must end in
a question, must stay anchored in the learner's own words, and must
never smuggle in outside facts. Four rules enforce that shape, and
every generated provocation is re-checked against them before it is
allowed out.
"""
from fieldatlas import (
    gate,
    generate_linked,
    generate_single,
    maya_fixture,
    session_vocab,
)

print("The Socratic Constraint Layer")
print("=" * 40)

maya = maya_fixture()
vocab = maya.learner_vocab()
print(f"learner vocabulary: {len(vocab)} content tokens from "
      f"{len(maya.all_cards())} cards")

###############################################################################
# The four rules
# --------------
# R1: the text ends with a question.
# R2: at least half the sentences are questions.
# R3: at least one content token comes from the learner's vocabulary.
# R4: declarative sentences use only learner vocabulary, stopwords and
#     a short list of reporting words (described, observed, noted, ...).

good = maya.met_provocation_card.voice_text
print(f"\na provocation that shipped:\n  {good!r}")
verdict = gate(good, vocab)
for r in verdict.rule_results:
    print(f"  {r.code} {'pass' if r.passed else 'FAIL'}  {r.detail}")
print(f"  => {'PASS' if verdict.passed else 'FAIL'}")

###############################################################################
# Answers are rejected
# --------------------
# A declarative that hands the learner a fact (a name, a date) breaks
# R1 and R2 outright, and its foreign tokens break R4.

control = "The answer is that Leutze painted it in 1851."
print(f"\nthe control:\n  {control!r}")
verdict = gate(control, vocab)
for r in verdict.rule_results:
    print(f"  {r.code} {'pass' if r.passed else 'FAIL'}  {r.detail}")
print(f"  => {'PASS' if verdict.passed else 'FAIL'}")

###############################################################################
# Generation echoes the learner
# -----------------------------
# Templates only ever quote the trigger card's own highest-frequency
# content tokens, so the output cannot contain knowledge the learner
# has not already produced. Both forms are gated before return.

single = generate_single(maya.washington_card)
print(f"\nsingle-card form (from the first Met note):\n  {single.text!r}")
print(f"  gate passed: {single.gate.passed}")

linked = generate_linked(maya.lincoln_card, maya.washington_card)
print(f"\nlinked form (Lincoln note back to the Met note):\n  {linked.text!r}")
print(f"  gate passed: {linked.gate.passed}")

###############################################################################
# Vocabulary scoping
# ------------------
# session_vocab builds the allowed token set from any card list, so a
# gate can be as narrow as one session or as wide as the learner's
# whole history.

met_only = session_vocab(maya.met.cards)
print(f"\nMet-session vocabulary is smaller: {len(met_only)} tokens")
print(f"'lincoln' in Met vocab: {'lincoln' in met_only}")
print(f"'lincoln' in learner vocab: {'lincoln' in vocab}")
