"""Reference theories and their expected outputs."""

LION_CONTEXT = (
    "sent1: The tiger chases the lion. sent2: The lion is not big. sent3: If something visits the dog "
    "and it is kind then it visits the mouse. sent4: The dog chases the lion. sent5: If something is big "
    "then it visits the dog. sent6: The tiger eats the dog. sent7: If something visits the tiger and the "
    "tiger is not red then it is not nice. sent8: If something chases the dog then it is not red. sent9: "
    "The mouse does not chase the tiger. sent10: If something visits the mouse then the mouse is red. "
    "sent11: The tiger visits the lion. sent12: The tiger does not eat the mouse. sent13: The mouse is "
    "nice. sent14: The lion does not eat the tiger. sent15: If the tiger visits the dog and the dog is "
    "not big then the dog chases the mouse. sent16: The lion visits the tiger. sent17: If something "
    "chases the lion and it visits the dog then it chases the dog. sent18: The dog is nice. sent19: If "
    "something chases the lion then it is big. sent20: If something eats the lion then it is not cold."
)
LION_QUESTION = "The lion is not nice?"
LION_QA_INPUT = "$answer$ ; $proof$ ; $question$ = The lion is not nice? ; $context$ = " + LION_CONTEXT
LION_QA_OUTPUT = (
    "$answer$ = True ; $proof$ = # sent7@int1 & sent16 # sent8@int2 # sent17@int3 & sent1 "
    "# sent5@int4 # sent19@int5 sent1 ; with int1: The lion is not nice. ; int2: The tiger is not red. "
    "; int3: The tiger chases the dog. ; int4: The tiger visits the dog. ; int5: The tiger is big."
)
LION_PROOF = (
    "# sent7@int1 & sent16 # sent8@int2 # sent17@int3 & sent1 # sent5@int4 # sent19@int5 sent1 ; "
    "with int1: The lion is not nice. ; int2: The tiger is not red. ; int3: The tiger chases the dog. "
    "; int4: The tiger visits the dog. ; int5: The tiger is big."
)
LION_ENUM_INPUT = "$answer$ ; $proof$ ; $question$ = What are all the inferences? ; $context$ = " + LION_CONTEXT
LION_ENUM_OUTPUT = (
    "$answer$ = The dog is big. The tiger is big. The dog visits the dog. The tiger visits the dog. "
    "The dog chases the dog. The tiger chases the dog. The dog is not red. The tiger is not red. "
    "The lion is not nice."
)
LION_IMPLICATIONS = [
    "The dog is big.", "The tiger is big.", "The dog visits the dog.", "The tiger visits the dog.",
    "The dog chases the dog.", "The tiger chases the dog.", "The dog is not red.",
    "The tiger is not red.", "The lion is not nice.",
]

COW_CONTEXT = (
    "sent1: If something eats the cow and it is big then the cow sees the bald eagle. sent2: If "
    "something likes the bald eagle then it is rough. sent3: If something eats the dog then it likes "
    "the cow. sent4: Big things are young. sent5: If something likes the cow then it eats the cow. "
    "sent6: If something sees the bald eagle then the bald eagle eats the cow. sent7: If something "
    "likes the bald eagle then the bald eagle is kind. sent8: If something sees the bald eagle then "
    "the bald eagle eats the dog. sent9: The bald eagle eats the cow. sent10: The bald eagle sees the "
    "dog. sent11: The dog is big. sent12: The cow likes the bald eagle. sent13: The bald eagle is "
    "young. sent14: The dog sees the cow. sent15: The bald eagle is kind. sent16: The dog is young. "
    "sent17: The bald eagle sees the cow. sent18: The bald eagle is rough. sent19: The cow eats the "
    "bald eagle. sent20: The dog is cold. sent21: The dog likes the cow. sent22: The dog eats the "
    "bald eagle. sent23: The dog eats the cow. sent24: The bald eagle likes the dog. sent25: The "
    "bald eagle likes the cow. sent26: The cow sees the bald eagle. sent27: The cow sees the dog."
)
COW_STEP_INPUT = "$answer$ ; $proof$ ; $question$ = What is one single-hop inference? ; $context$ = " + COW_CONTEXT
COW_STEP_OUTPUT = "$answer$ = The cow is rough. ; $proof$ = # sent2 sent12"

DAVE_CONTEXT = (
    "triple1: Anne is white. triple2: Charlie is young. triple3: Dave is round. triple4: Erin is quiet. "
    "rule1: If someone is rough and young then they are blue. rule2: Rough, white people are smart. "
    "rule3: All smart people are rough. rule4: All white people are smart. rule5: If someone is young "
    "then they are smart. rule6: All smart people are rough."
)
DAVE_ABDUCTION_INPUT = "$answer$ ; $question$ = Dave is rough. ; $context$ = " + DAVE_CONTEXT
DAVE_ABDUCTION_OUTPUT = "$answer$ = Dave is young. , Dave is smart."

# Reconstructed theory around the worked percent-dialect encoding: rule18
# concludes "Charlie is quiet." from fact5 and "Charlie is young.", which
# rule12 concludes from "Charlie is kind.", which rule11 concludes from fact16.
CHARLIE_SENTENCES = [
    ("fact1", "Anne is blue."),
    ("fact2", "Anne is cold."),
    ("fact3", "Bob is green."),
    ("fact4", "Bob is rough."),
    ("fact5", "Charlie is white."),
    ("fact6", "Dave is round."),
    ("fact7", "Dave is nice."),
    ("fact8", "Erin is furry."),
    ("fact9", "Erin is red."),
    ("fact10", "Fiona is smart."),
    ("fact11", "Fiona is blue."),
    ("fact12", "Gary is cold."),
    ("fact13", "Gary is rough."),
    ("fact14", "Harry is green."),
    ("fact15", "Harry is nice."),
    ("fact16", "Charlie is big."),
    ("rule1", "If someone is blue and cold then they are furry."),
    ("rule2", "If someone is green then they are round."),
    ("rule3", "If someone is round and nice then they are red."),
    ("rule4", "If someone is furry and red then they are smart."),
    ("rule5", "All smart people are blue."),
    ("rule6", "If Bob is rough then Bob is green."),
    ("rule7", "If someone is cold and rough then they are furry."),
    ("rule8", "Rough, furry people are smart."),
    ("rule9", "If someone is blue and furry then they are cold."),
    ("rule10", "If Dave is red then Dave is rough."),
    ("rule11", "If someone is big then they are kind."),
    ("rule12", "If someone is kind then they are young."),
    ("rule13", "If someone is nice and rough then they are green."),
    ("rule14", "If someone is young and not white then they are nice."),
    ("rule15", "If someone is red and rough then they are cold."),
    ("rule16", "Quiet people are round."),
    ("rule17", "If Harry is red then Harry is quiet."),
    ("rule18", "If someone is white and young then they are quiet."),
]
CHARLIE_CONTEXT = " ".join(f"{i}: {s}" for i, s in CHARLIE_SENTENCES)
CHARLIE_PROOF = (
    "# rule18%conc1 & fact5 # rule12%conc2 # rule11%conc3 fact16 ; with conc1: Charlie is quiet. "
    "; conc2: Charlie is young. ; conc3: Charlie is kind."
)
