"""Freezes reference Porter stems (original algorithm) for the unit tests.

Run: python3 make_stem_oracle.py > porter_original.tsv
"""
from itertools import product

from nltk.stem.porter import PorterStemmer

WORDS = """caresses ponies ties caress cats feed agreed plastered bled motoring sing
conflated troubled sized hopping tanned falling hissing fizzed failing filing happy sky
relational conditional rational valenci hesitanci digitizer conformabli radicalli
differentli vileli analogousli vietnamization predication operator feudalism
decisiveness hopefulness callousness formaliti sensitiviti sensibiliti triplicate
formative formalize electriciti electrical hopeful goodness revival allowance inference
airliner gyroscopic adjustable defensible irritant replacement adjustment dependent
adoption homologou communism activate angulariti homologous effective bowdlerize
probate rate cease controll roll generalizations oscillators vaccines vaccinated
vaccination running experts said markets agree a is as us was this news quote quotes
quotation source sources expert experts retrieval retrieve retrieved indexing indexes
cluster clusters clustering relevance relevant ranking ranked ranks documents document
language languages model modeling models smoothing smoothed candidate candidates
sentence sentences annotation annotated annotator extraction extracted extracting
publishing published publication categories category keywords summary summarize
evaluation evaluate evaluated precision recall average averaged discount discounted
hierarchical navigable graphs neighbors neighbour approximate approximation
organization organisations scientist scientists physician physicians epidemiology
government governments minister ministers spokesperson spokeswoman economists
lockdown lockdowns restrictions restricted reopening reopened infection infections
infectious mortality hospitals hospitalized testing tested vaccine virus viruses
""".split()

ROOTS = ["relat", "condit", "nation", "form", "sens", "adjust", "defens", "gener",
         "commun", "activ", "effect", "analog", "electr", "hope", "good", "digit",
         "radic", "differ", "predic", "oper", "feud", "decis", "call", "trip", "revi",
         "allow", "infer", "airlin", "gyrosc", "depend", "adopt", "homolog", "angul",
         "bowdl", "prob", "control", "oscill", "vaccin", "run", "agre"]
SUFFIXES = ["", "s", "es", "ed", "ing", "ation", "ational", "ization", "izer", "ness",
            "fulness", "iveness", "ousness", "ality", "ivity", "ibility", "icate",
            "ative", "alize", "iciti", "ical", "ful", "ement", "ment", "ent", "ance",
            "ence", "able", "ible", "ant", "ism", "ate", "iti", "ous", "ive", "ize",
            "ly", "y", "e", "al"]


def main():
    stemmer = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)
    # words of one or two letters are left unstemmed by the library
    words = sorted(w for w in set(WORDS) | {r + s for r, s in product(ROOTS, SUFFIXES)} if len(w) > 2)
    for w in words:
        print(f"{w}\t{stemmer.stem(w)}")


if __name__ == "__main__":
    main()
