"""Builds golden_corpus.jsonl, the curated example corpus.

The expected match records in golden_matches.csv were enumerated by
hand from the documented matching semantics; regenerate the corpus with
``python tests/data/build_golden.py`` after editing the sentences and
re-derive the CSV by hand if the change affects any match.
"""

import json
from pathlib import Path

# (doc_id, year, doc_type, main_field, meso_field, [(family, given)], sentences)
# Each sentence is (text, [(ref_id, cited_doc_id, cited_year, [(family, given)])]).
DOCS = [
    (
        "g01", 2010, "full-article", "BioHealth", 101, [("smith", "s")],
        [
            ("This study examines nutrient limitation in freshwater ecosystems.", []),
            (
                "Although phosphorus has traditionally been seen as the limiting "
                "nutrient in freshwater ecosystems <ref id=\"g01r1\"/>, more recent "
                "evidence has begun to challenge this view and has demonstrated that "
                "both nitrogen and phosphorus can limit, or at least co-limit, "
                "primary production in freshwaters <ref id=\"g01r2\"/>.",
                [("g01r1", None, 1997, None), ("g01r2", None, 2007, None)],
            ),
            (
                "However, recent studies have challenged this survival benefit in "
                "comparison with current usual care <ref id=\"g01r3\"/>.",
                [("g01r3", None, 2004, None)],
            ),
            (
                "The low affinity with which volatile general anesthetics bind to "
                "macromolecules has made conclusive identification of the in vivo "
                "targets by direct binding studies a challenge <ref id=\"g01r4\"/>.",
                [("g01r4", None, 2001, None)],
            ),
            (
                "It has been reported that the prevalence of autoimmune disorders in "
                "celiac disease is related to the duration of exposure to gluten "
                "<ref id=\"g01r5\"/>, although this result has been challenged "
                "<ref id=\"g01r6\"/>.",
                [("g01r5", None, 1999, None), ("g01r6", None, 2002, None)],
            ),
        ],
    ),
    (
        "g02", 2012, "full-article", "BioHealth", 102, [("treanor", "j")],
        [
            (
                "Analogues of these molecules have shown up to 1000-fold higher "
                "activity but are a great challenge to delivery because of their "
                "extreme hydrophobicity <ref id=\"g02r1\"/>.",
                [("g02r1", None, 2004, None)],
            ),
            (
                "This result challenges AUM theory <ref id=\"g02r2\"/> and some "
                "prior research <ref id=\"g02r3\"/>.",
                [("g02r2", None, 2005, None), ("g02r3", None, 1990, None)],
            ),
            (
                "The description of the resonant electron capture by molecules "
                "connected with the formation of negative ions represents still the "
                "challenge for the theory <ref id=\"g02r4\"/>.",
                [("g02r4", None, None, None)],
            ),
            (
                "This model has since been challenged by claims that Helderberg "
                "formation boundaries are isochronous across the basin "
                "<ref id=\"g02r5\"/>.",
                [("g02r5", None, 2009, None)],
            ),
            (
                "Subsequent studies in the human challenge model have also supported "
                "the role of NA-specific antibody in protection <ref id=\"g02r6\"/>.",
                [("g02r6", None, 2010, None)],
            ),
        ],
    ),
    (
        "g03", 2014, "full-article", "SocHum", 301, [("gudykunst", "w")],
        [
            (
                "To facilitate conflict management and analysis in Mcr "
                "<ref id=\"g03r1\"/>, the Graph Model for Conflict Resolution (GMCR) "
                "<ref id=\"g03r2\"/> was used.",
                [("g03r1", None, 2008, None), ("g03r2", None, 1993, None)],
            ),
            (
                "The 4-year extension study provided ambiguous <ref id=\"g03r3\"/> "
                "and conflicting post hoc <ref id=\"g03r4\"/> results.",
                [("g03r3", None, 2011, None), ("g03r4", None, 2012, None)],
            ),
            (
                "Although there is substantial evidence supporting this idea, there "
                "are also recent conflicting reports <ref id=\"g03r5\"/>.",
                [("g03r5", None, 2013, None)],
            ),
            (
                "We find that coffee does not cause cancer, contrary to the finding "
                "of <ref id=\"g03r6\"/> that coffee does cause cancer.",
                [("g03r6", None, 2006, None)],
            ),
            (
                "Contrary to previous studies that did not observe evidence to "
                "support the hypothesis that coffee causes cancer <ref id=\"g03r7\"/>, "
                "our data suggests that drinking coffee increases the probability of "
                "cancer by 50%.",
                [("g03r7", None, 2001, None)],
            ),
            (
                "Past studies <ref id=\"g03r8\"/> review the theoretical literature "
                "and concludes that future empirical research should challenge the "
                "assumptions and analysis of the theory.",
                [("g03r8", None, 2000, None)],
            ),
        ],
    ),
    (
        "g04", 2011, "full-article", "LifeEarth", 201, [("zhao", "g")],
        [
            (
                "These observations are rather in contradiction with Smith et al.'s "
                "<ref id=\"g04r1\"/> analysis.",
                [("g04r1", None, 2004, [("smith", "j")])],
            ),
            (
                "Subsequent analyses <ref id=\"g04r2\"/> contradicted these findings.",
                [("g04r2", None, 2008, None)],
            ),
            (
                "The timing of the collision between these blocks remains "
                "controversial <ref id=\"g04r3\"/>.",
                [("g04r3", "x-zhao-2001", 2001, [("zhao", "g"), ("wilde", "s")])],
            ),
            (
                "It is currently debated how the collisional processes proceeded "
                "<ref id=\"g04r4\"/>.",
                [("g04r4", "x-kusky-2003", 2003, [("kusky", "t"), ("li", "j")])],
            ),
            (
                "There remains controversy in the scientific literature over whether "
                "or not coffee is associated with an increased risk of cancer "
                "<ref id=\"g04r5\"/> <ref id=\"g04r6\"/>.",
                [
                    ("g04r5", "x-zhao-2001", 2001, [("zhao", "g"), ("wilde", "s")]),
                    ("g04r6", "x-kusky-2003", 2003, [("kusky", "t"), ("li", "j")]),
                ],
            ),
            (
                "The mechanism remains controversial, and there is no consensus "
                "about the underlying pathway <ref id=\"g04r7\"/>.",
                [("g04r7", "x-munro-2003", 2003, [("munro", "s")])],
            ),
        ],
    ),
    (
        "g05", 2013, "review", "BioHealth", 103, [("munro", "s")],
        [
            (
                "There is no consensus on the optimal dosing strategy in this "
                "population <ref id=\"g05r1\"/>.",
                [("g05r1", None, 2010, None)],
            ),
            (
                "There remains a lack of consensus in the literature over whether "
                "coffee is associated with an increased risk of cancer "
                "<ref id=\"g05r2\"/>.",
                [("g05r2", None, 2009, None)],
            ),
            (
                "The binding motif matches the consensus sequence reported "
                "previously, but there is no consensus on its functional role "
                "<ref id=\"g05r3\"/>.",
                [("g05r3", None, 2005, None)],
            ),
            (
                "Mutations at the consensus site <ref id=\"g05r4\"/> were not "
                "analyzed here.",
                [("g05r4", None, 2007, None)],
            ),
            (
                "A recent review of studies assessing the potential link between "
                "coffee consumption and cancer risk has observed continued "
                "controversy <ref id=\"g05r5\"/>.",
                [("g05r5", "x-munro-2003", 2003, [("munro", "s")])],
            ),
            ("Further mechanistic work is required.", []),
        ],
    ),
    (
        "g06", 2009, "full-article", "PhysEngr", 401, [("murphy", "k")],
        [
            (
                "The authors declare that there was no conflict of interest "
                "regarding this work <ref id=\"g06r1\"/>.",
                [("g06r1", None, 2008, None)],
            ),
            (
                "Participants rated each item on a five-point Likert scale from "
                "strongly agree to strongly disagree <ref id=\"g06r2\"/>.",
                [("g06r2", None, 2003, None)],
            ),
            (
                "There was considerable inter-rater disagreement on a Likert scale "
                "in these assessments <ref id=\"g06r3\"/>.",
                [("g06r3", None, 2004, None)],
            ),
            (
                "Our results do not contradict the original hypothesis "
                "<ref id=\"g06r4\"/>.",
                [("g06r4", None, 2001, None)],
            ),
            (
                "These techniques are typically used to prove or disprove an a "
                "priori hypothesized model <ref id=\"g06r5\"/>.",
                [("g06r5", None, 1998, None)],
            ),
            (
                "The original theorem was proved in earlier work <ref id=\"g06r6\"/>, "
                "and the generalization to infinite dimensions that many researchers "
                "subsequently conjectured was later disproved by recent "
                "counterexamples <ref id=\"g06r7\"/>.",
                [("g06r6", None, 1995, None), ("g06r7", None, 2007, None)],
            ),
            (
                "Subsequent experiments <ref id=\"g06r8\"/> have disproved this "
                "longstanding conjecture about superconductivity in these materials.",
                [("g06r8", None, 2006, None)],
            ),
        ],
    ),
    (
        "g07", 2015, "full-article", "SocHum", 302, [("doody", "o")],
        [
            (
                "Renewable energy targets have featured prominently in the public "
                "debate <ref id=\"g07r1\"/> in recent years.",
                [("g07r1", None, 2012, None)],
            ),
            (
                "A debate persists in the literature regarding the mechanism of "
                "this reaction <ref id=\"g07r2\"/>.",
                [("g07r2", None, 2010, None)],
            ),
            (
                "While the parliamentary debates <ref id=\"g07r3\"/> attracted "
                "public attention, a scientific debate about the methodology "
                "continued <ref id=\"g07r4\"/>.",
                [("g07r3", None, 2013, None), ("g07r4", None, 2014, None)],
            ),
            (
                "The senate debates <ref id=\"g07r5\"/> and congressional hearings "
                "like the political debates <ref id=\"g07r6\"/> rarely change policy "
                "or societal attitudes.",
                [("g07r5", None, 2011, None), ("g07r6", None, 2009, None)],
            ),
            (
                "These competing theories have been debated <ref id=\"g07r7\"/> for "
                "decades.",
                [("g07r7", None, 1987, None)],
            ),
        ],
    ),
    (
        "g08", 2008, "full-article", "MathComp", 501, [("kusky", "t")],
        [
            (
                "Our estimates differ markedly from those reported in a different "
                "model specification <ref id=\"g08r1\"/>.",
                [("g08r1", None, 2005, None)],
            ),
            (
                "This technique differs substantially from established methods "
                "<ref id=\"g08r2\"/>.",
                [("g08r2", None, 2002, None)],
            ),
            (
                "Popper <ref id=\"g08r3\"/> argued that refutability distinguishes "
                "science, and this claim was later refuted by several findings "
                "<ref id=\"g08r4\"/>.",
                [("g08r3", None, 1963, None), ("g08r4", None, 2006, None)],
            ),
            (
                "Our experiments refute both hypotheses proposed in previous work "
                "<ref id=\"g08r5\"/>.",
                [("g08r5", None, 2003, [("kusky", "t")])],
            ),
            (
                "The two laboratories could not agree on the interpretation of "
                "these measurements <ref id=\"g08r6\"/>.",
                [("g08r6", None, 2007, None)],
            ),
            (
                "There was no agreement between the two models regarding the "
                "predicted collapse threshold <ref id=\"g08r7\"/>.",
                [("g08r7", None, 2004, None)],
            ),
            (
                "One report disagreed with the conclusions of <ref id=\"g08r8\"/>.",
                [("g08r8", None, 2001, None)],
            ),
        ],
    ),
    (
        "g09", 2016, "short-communication", "MathComp", 502, [("wilde", "s")],
        [
            (
                "In contrast to the classical theory <ref id=\"g09r1\"/>, our "
                "framework allows heterogeneous agents.",
                [("g09r1", None, 1985, None)],
            ),
            (
                "In contrast to the more widely accepted theory <ref id=\"g09r2\"/>, "
                "our approach allows heterogeneous agents.",
                [("g09r2", None, 1996, None)],
            ),
            (
                "This approach contrasts with the outcome reported by "
                "<ref id=\"g09r3\"/>.",
                [("g09r3", None, 2011, None)],
            ),
            (
                "The generalizability of these conclusions remains questionable "
                "<ref id=\"g09r4\"/>.",
                [("g09r4", None, 2014, None)],
            ),
            (
                "The correlation coefficient kappa and the wide range of outcomes "
                "reported make direct comparison difficult <ref id=\"g09r5\"/>.",
                [("g09r5", None, 2013, None)],
            ),
            (
                "Assuming that coffee increases the probability of cancer by 50%, "
                "the predicted life expectancy for the Dutch population is 80 years, "
                "in contrast to the 85 years proposed by models that assumed coffee "
                "does not increase the risk of cancer <ref id=\"g09r6\"/>.",
                [("g09r6", None, 2015, None)],
            ),
        ],
    ),
]


def build() -> list[dict]:
    records = []
    for doc_id, year, doc_type, main_field, meso_field, authors, sentences in DOCS:
        records.append({
            "doc_id": doc_id,
            "year": year,
            "doc_type": doc_type,
            "main_field": main_field,
            "meso_field": meso_field,
            "authors": [{"family": f, "given": g} for f, g in authors],
            "sentences": [
                {
                    "text": text,
                    "refs": [
                        {
                            "ref_id": rid,
                            "cited_doc_id": cited_doc,
                            "cited_year": cited_year,
                            "cited_authors": None if cited_authors is None else [
                                {"family": f, "given": g} for f, g in cited_authors
                            ],
                        }
                        for rid, cited_doc, cited_year, cited_authors in refs
                    ],
                }
                for text, refs in sentences
            ],
        })
    return records


if __name__ == "__main__":
    out = Path(__file__).parent / "golden_corpus.jsonl"
    with open(out, "w", encoding="utf-8") as handle:
        for record in build():
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
    print(f"wrote {out}")
