"""Bundled 7-language fixture corpus and constructed-log generator.

Synthetic but language-typical parallel QA data: property questions about
everyday objects (answers are color/material noun phrases, translated per
language) plus landmark questions (answers are city names, often identical
across the Latin-script languages, mirroring real shared named entities).
Everything is deterministic given the seed, so tests can freeze expected
values against it.

Constructed generation logs plant a known verdict label per record by
emitting a (decorated) gold answer of the intended language, which gives the
matcher an exact, label-by-construction oracle.
"""

from __future__ import annotations

import json
import random
from pathlib import Path
from typing import Iterable, Mapping

from .corpus import ParallelCorpus, QAItem

LANGUAGES = ("en", "fr", "de", "hi", "it", "pt", "es")

DEFAULT_SEED = 42

# slug -> per-language noun; en is bare (article added by the templates),
# the Romance/German entries carry their article, hi carries (noun, gender).
NOUNS = {
    "book": {"en": "book", "fr": "le livre", "de": "das Buch", "hi": ("किताब", "f"), "it": "il libro", "pt": "o livro", "es": "el libro"},
    "house": {"en": "house", "fr": "la maison", "de": "das Haus", "hi": ("घर", "m"), "it": "la casa", "pt": "a casa", "es": "la casa"},
    "river": {"en": "river", "fr": "le fleuve", "de": "der Fluss", "hi": ("नदी", "f"), "it": "il fiume", "pt": "o rio", "es": "el río"},
    "mountain": {"en": "mountain", "fr": "la montagne", "de": "der Berg", "hi": ("पहाड़", "m"), "it": "la montagna", "pt": "a montanha", "es": "la montaña"},
    "flower": {"en": "flower", "fr": "la fleur", "de": "die Blume", "hi": ("फूल", "m"), "it": "il fiore", "pt": "a flor", "es": "la flor"},
    "bird": {"en": "bird", "fr": "l'oiseau", "de": "der Vogel", "hi": ("पक्षी", "m"), "it": "l'uccello", "pt": "o pássaro", "es": "el pájaro"},
    "fish": {"en": "fish", "fr": "le poisson", "de": "der Fisch", "hi": ("मछली", "f"), "it": "il pesce", "pt": "o peixe", "es": "el pez"},
    "tree": {"en": "tree", "fr": "l'arbre", "de": "der Baum", "hi": ("पेड़", "m"), "it": "l'albero", "pt": "a árvore", "es": "el árbol"},
    "moon": {"en": "moon", "fr": "la lune", "de": "der Mond", "hi": ("चाँद", "m"), "it": "la luna", "pt": "a lua", "es": "la luna"},
    "sun": {"en": "sun", "fr": "le soleil", "de": "die Sonne", "hi": ("सूरज", "m"), "it": "il sole", "pt": "o sol", "es": "el sol"},
    "star": {"en": "star", "fr": "l'étoile", "de": "der Stern", "hi": ("तारा", "m"), "it": "la stella", "pt": "a estrela", "es": "la estrella"},
    "sky": {"en": "sky", "fr": "le ciel", "de": "der Himmel", "hi": ("आकाश", "m"), "it": "il cielo", "pt": "o céu", "es": "el cielo"},
    "sea": {"en": "sea", "fr": "la mer", "de": "das Meer", "hi": ("समुद्र", "m"), "it": "il mare", "pt": "o mar", "es": "el mar"},
    "forest": {"en": "forest", "fr": "la forêt", "de": "der Wald", "hi": ("जंगल", "m"), "it": "la foresta", "pt": "a floresta", "es": "el bosque"},
    "bridge": {"en": "bridge", "fr": "le pont", "de": "die Brücke", "hi": ("पुल", "m"), "it": "il ponte", "pt": "a ponte", "es": "el puente"},
    "door": {"en": "door", "fr": "la porte", "de": "die Tür", "hi": ("दरवाज़ा", "m"), "it": "la porta", "pt": "a porta", "es": "la puerta"},
    "key": {"en": "key", "fr": "la clé", "de": "der Schlüssel", "hi": ("चाबी", "f"), "it": "la chiave", "pt": "a chave", "es": "la llave"},
    "clock": {"en": "clock", "fr": "l'horloge", "de": "die Uhr", "hi": ("घड़ी", "f"), "it": "l'orologio", "pt": "o relógio", "es": "el reloj"},
    "garden": {"en": "garden", "fr": "le jardin", "de": "der Garten", "hi": ("बगीचा", "m"), "it": "il giardino", "pt": "o jardim", "es": "el jardín"},
    "island": {"en": "island", "fr": "l'île", "de": "die Insel", "hi": ("द्वीप", "m"), "it": "l'isola", "pt": "a ilha", "es": "la isla"},
    "horse": {"en": "horse", "fr": "le cheval", "de": "das Pferd", "hi": ("घोड़ा", "m"), "it": "il cavallo", "pt": "o cavalo", "es": "el caballo"},
    "stone": {"en": "stone", "fr": "la pierre", "de": "der Stein", "hi": ("पत्थर", "m"), "it": "la pietra", "pt": "a pedra", "es": "la piedra"},
    "boat": {"en": "boat", "fr": "le bateau", "de": "das Boot", "hi": ("नाव", "f"), "it": "la barca", "pt": "o barco", "es": "el barco"},
    "cloud": {"en": "cloud", "fr": "le nuage", "de": "die Wolke", "hi": ("बादल", "m"), "it": "la nuvola", "pt": "a nuvem", "es": "la nube"},
}

# Possessors carry the genitive construction of their language.
POSSESSORS = {
    "king": {"en": "king", "fr": "du roi", "de": "des Königs", "hi": "राजा", "it": "del re", "pt": "do rei", "es": "del rey"},
    "queen": {"en": "queen", "fr": "de la reine", "de": "der Königin", "hi": "रानी", "it": "della regina", "pt": "da rainha", "es": "de la reina"},
    "teacher": {"en": "teacher", "fr": "du professeur", "de": "des Lehrers", "hi": "शिक्षक", "it": "dell'insegnante", "pt": "do professor", "es": "del maestro"},
    "doctor": {"en": "doctor", "fr": "du médecin", "de": "des Arztes", "hi": "डॉक्टर", "it": "del dottore", "pt": "do médico", "es": "del médico"},
    "captain": {"en": "captain", "fr": "du capitaine", "de": "des Kapitäns", "hi": "कप्तान", "it": "del capitano", "pt": "do capitão", "es": "del capitán"},
    "painter": {"en": "painter", "fr": "du peintre", "de": "des Malers", "hi": "चित्रकार", "it": "del pittore", "pt": "do pintor", "es": "del pintor"},
    "poet": {"en": "poet", "fr": "du poète", "de": "des Dichters", "hi": "कवि", "it": "del poeta", "pt": "do poeta", "es": "del poeta"},
    "farmer": {"en": "farmer", "fr": "du fermier", "de": "des Bauern", "hi": "किसान", "it": "del contadino", "pt": "do agricultor", "es": "del agricultor"},
    "sailor": {"en": "sailor", "fr": "du marin", "de": "des Seemanns", "hi": "नाविक", "it": "del marinaio", "pt": "do marinheiro", "es": "del marinero"},
    "baker": {"en": "baker", "fr": "du boulanger", "de": "des Bäckers", "hi": "नानबाई", "it": "del fornaio", "pt": "do padeiro", "es": "del panadero"},
}

COLORS = {
    "dark_red": {"en": "dark red", "fr": "rouge foncé", "de": "dunkelrot", "hi": "गहरा लाल", "it": "rosso scuro", "pt": "vermelho escuro", "es": "rojo oscuro"},
    "light_blue": {"en": "light blue", "fr": "bleu clair", "de": "hellblau", "hi": "हल्का नीला", "it": "azzurro chiaro", "pt": "azul claro", "es": "azul claro"},
    "dark_green": {"en": "dark green", "fr": "vert foncé", "de": "dunkelgrün", "hi": "गहरा हरा", "it": "verde scuro", "pt": "verde escuro", "es": "verde oscuro"},
    "bright_yellow": {"en": "bright yellow", "fr": "jaune vif", "de": "leuchtend gelb", "hi": "चमकीला पीला", "it": "giallo brillante", "pt": "amarelo brilhante", "es": "amarillo brillante"},
    "pure_white": {"en": "pure white", "fr": "blanc pur", "de": "reinweiß", "hi": "शुद्ध सफेद", "it": "bianco puro", "pt": "branco puro", "es": "blanco puro"},
    "deep_black": {"en": "deep black", "fr": "noir profond", "de": "tiefschwarz", "hi": "गहरा काला", "it": "nero profondo", "pt": "preto profundo", "es": "negro profundo"},
    "pale_pink": {"en": "pale pink", "fr": "rose pâle", "de": "blassrosa", "hi": "हल्का गुलाबी", "it": "rosa pallido", "pt": "rosa pálido", "es": "rosa pálido"},
    "golden_brown": {"en": "golden brown", "fr": "brun doré", "de": "goldbraun", "hi": "सुनहरा भूरा", "it": "marrone dorato", "pt": "marrom dourado", "es": "marrón dorado"},
    "silver_gray": {"en": "silver gray", "fr": "gris argenté", "de": "silbergrau", "hi": "चांदी जैसा धूसर", "it": "grigio argento", "pt": "cinza prateado", "es": "gris plateado"},
    "dark_purple": {"en": "dark purple", "fr": "violet foncé", "de": "dunkelviolett", "hi": "गहरा बैंगनी", "it": "viola scuro", "pt": "roxo escuro", "es": "morado oscuro"},
    # Shared strings across several languages, like real named entities.
    "orange": {"en": "orange", "fr": "orange", "de": "orange", "hi": "नारंगी", "it": "arancione", "pt": "laranja", "es": "naranja"},
    "turquoise": {"en": "turquoise", "fr": "turquoise", "de": "türkis", "hi": "फ़िरोज़ा", "it": "turchese", "pt": "turquesa", "es": "turquesa"},
}

MATERIALS = {
    "wood": {"en": "wood", "fr": "bois", "de": "Holz", "hi": "लकड़ी", "it": "legno", "pt": "madeira", "es": "madera"},
    "stone": {"en": "stone", "fr": "pierre", "de": "Stein", "hi": "पत्थर", "it": "pietra", "pt": "pedra", "es": "piedra"},
    "glass": {"en": "glass", "fr": "verre", "de": "Glas", "hi": "कांच", "it": "vetro", "pt": "vidro", "es": "vidrio"},
    "iron": {"en": "iron", "fr": "fer", "de": "Eisen", "hi": "लोहा", "it": "ferro", "pt": "ferro", "es": "hierro"},
    "gold": {"en": "gold", "fr": "or", "de": "Gold", "hi": "सोना", "it": "oro", "pt": "ouro", "es": "oro"},
    "silver": {"en": "silver", "fr": "argent", "de": "Silber", "hi": "चांदी", "it": "argento", "pt": "prata", "es": "plata"},
    "paper": {"en": "paper", "fr": "papier", "de": "Papier", "hi": "कागज़", "it": "carta", "pt": "papel", "es": "papel"},
    "clay": {"en": "clay", "fr": "argile", "de": "Ton", "hi": "मिट्टी", "it": "argilla", "pt": "argila", "es": "arcilla"},
    "leather": {"en": "leather", "fr": "cuir", "de": "Leder", "hi": "चमड़ा", "it": "cuoio", "pt": "couro", "es": "cuero"},
    "wool": {"en": "wool", "fr": "laine", "de": "Wolle", "hi": "ऊन", "it": "lana", "pt": "lã", "es": "lana"},
}

LANDMARKS = {
    "eiffel_tower": (
        {"en": "the Eiffel Tower", "fr": "la tour Eiffel", "de": "der Eiffelturm", "hi": "एफिल टॉवर", "it": "la Torre Eiffel", "pt": "a Torre Eiffel", "es": "la Torre Eiffel"},
        {"en": "Paris", "fr": "Paris", "de": "Paris", "hi": "पेरिस", "it": "Parigi", "pt": "Paris", "es": "París"},
    ),
    "brandenburg_gate": (
        {"en": "the Brandenburg Gate", "fr": "la porte de Brandebourg", "de": "das Brandenburger Tor", "hi": "ब्रांडेनबर्ग गेट", "it": "la Porta di Brandeburgo", "pt": "o Portão de Brandemburgo", "es": "la Puerta de Brandeburgo"},
        {"en": "Berlin", "fr": "Berlin", "de": "Berlin", "hi": "बर्लिन", "it": "Berlino", "pt": "Berlim", "es": "Berlín"},
    ),
    "prado_museum": (
        {"en": "the Prado Museum", "fr": "le musée du Prado", "de": "das Prado-Museum", "hi": "प्राडो संग्रहालय", "it": "il Museo del Prado", "pt": "o Museu do Prado", "es": "el Museo del Prado"},
        {"en": "Madrid", "fr": "Madrid", "de": "Madrid", "hi": "मैड्रिड", "it": "Madrid", "pt": "Madrid", "es": "Madrid"},
    ),
    "colosseum": (
        {"en": "the Colosseum", "fr": "le Colisée", "de": "das Kolosseum", "hi": "कोलोसियम", "it": "il Colosseo", "pt": "o Coliseu", "es": "el Coliseo"},
        {"en": "Rome", "fr": "Rome", "de": "Rom", "hi": "रोम", "it": "Roma", "pt": "Roma", "es": "Roma"},
    ),
    "belem_tower": (
        {"en": "the Belém Tower", "fr": "la tour de Belém", "de": "der Turm von Belém", "hi": "बेलेम टॉवर", "it": "la Torre di Belém", "pt": "a Torre de Belém", "es": "la Torre de Belém"},
        {"en": "Lisbon", "fr": "Lisbonne", "de": "Lissabon", "hi": "लिस्बन", "it": "Lisbona", "pt": "Lisboa", "es": "Lisboa"},
    ),
    "opera_house": (
        {"en": "the Opera House", "fr": "l'opéra", "de": "das Opernhaus", "hi": "ओपेरा हाउस", "it": "il teatro dell'opera", "pt": "a casa da ópera", "es": "la ópera"},
        {"en": "Oslo", "fr": "Oslo", "de": "Oslo", "hi": "ओस्लो", "it": "Oslo", "pt": "Oslo", "es": "Oslo"},
    ),
    "schonbrunn": (
        {"en": "Schönbrunn Palace", "fr": "le château de Schönbrunn", "de": "das Schloss Schönbrunn", "hi": "शॉनब्रुन महल", "it": "il castello di Schönbrunn", "pt": "o Palácio de Schönbrunn", "es": "el Palacio de Schönbrunn"},
        {"en": "Vienna", "fr": "Vienne", "de": "Wien", "hi": "वियना", "it": "Vienna", "pt": "Viena", "es": "Viena"},
    ),
    "alcazar": (
        {"en": "the Alcázar fortress", "fr": "la forteresse de l'Alcázar", "de": "die Festung Alcázar", "hi": "अलकज़ार किला", "it": "la fortezza dell'Alcázar", "pt": "a fortaleza do Alcázar", "es": "la fortaleza del Alcázar"},
        {"en": "Toledo", "fr": "Tolède", "de": "Toledo", "hi": "टोलेडो", "it": "Toledo", "pt": "Toledo", "es": "Toledo"},
    ),
    "alhambra": (
        {"en": "the Alhambra", "fr": "l'Alhambra", "de": "die Alhambra", "hi": "अलहम्ब्रा", "it": "l'Alhambra", "pt": "a Alhambra", "es": "la Alhambra"},
        {"en": "Granada", "fr": "Grenade", "de": "Granada", "hi": "ग्रेनाडा", "it": "Granada", "pt": "Granada", "es": "Granada"},
    ),
    "louvre": (
        {"en": "the Louvre", "fr": "le Louvre", "de": "der Louvre", "hi": "लूव्र संग्रहालय", "it": "il Louvre", "pt": "o Louvre", "es": "el Louvre"},
        {"en": "Paris", "fr": "Paris", "de": "Paris", "hi": "पेरिस", "it": "Parigi", "pt": "Paris", "es": "París"},
    ),
}

TEMPLATES = {
    "color": {
        "en": "What color is {obj}?",
        "fr": "De quelle couleur est {obj} ?",
        "de": "Welche Farbe hat {obj}?",
        "hi": "{obj} का रंग क्या है?",
        "it": "Di che colore è {obj}?",
        "pt": "De que cor é {obj}?",
        "es": "¿De qué color es {obj}?",
    },
    "material": {
        "en": "What material is {obj} made of?",
        "fr": "Quelle est la matière de {obj} ?",
        "de": "Aus welchem Material besteht {obj}?",
        "hi": "{obj} किस चीज़ से बना है?",
        "it": "Qual è il materiale di {obj}?",
        "pt": "Qual é o material de {obj}?",
        "es": "¿Cuál es el material de {obj}?",
    },
    "where": {
        "en": "Where is {obj} located?",
        "fr": "Où se trouve {obj} ?",
        "de": "Wo befindet sich {obj}?",
        "hi": "{obj} कहाँ स्थित है?",
        "it": "Dove si trova {obj}?",
        "pt": "Onde fica {obj}?",
        "es": "¿Dónde se encuentra {obj}?",
    },
    # Choice variants put property vocabulary into the question text, the way
    # real QA corpora mention candidate entities in the question.
    "color_choice": {
        "en": "Is {obj} {a} or {b}?",
        "fr": "Est-ce que {obj} est {a} ou {b} ?",
        "de": "Ist {obj} {a} oder {b}?",
        "hi": "क्या {obj} {a} है या {b}?",
        "it": "{obj} è {a} o {b}?",
        "pt": "{obj} é {a} ou {b}?",
        "es": "¿{obj} es {a} o {b}?",
    },
    "material_choice": {
        "en": "Is {obj} made of {a} or {b}?",
        "fr": "Est-ce que {obj} est en {a} ou en {b} ?",
        "de": "Besteht {obj} aus {a} oder {b}?",
        "hi": "क्या {obj} {a} से बना है या {b} से?",
        "it": "{obj} è fatto di {a} o di {b}?",
        "pt": "{obj} é feito de {a} ou de {b}?",
        "es": "¿{obj} está hecho de {a} o de {b}?",
    },
}


def _object_phrase(noun_slug: str, poss_slug: str | None, lang: str) -> str:
    noun = NOUNS[noun_slug][lang]
    if lang == "hi":
        noun, gender = noun
        if poss_slug is None:
            return noun
        marker = "की" if gender == "f" else "का"
        return f"{POSSESSORS[poss_slug]['hi']} {marker} {noun}"
    if lang == "en":
        if poss_slug is None:
            return f"the {noun}"
        return f"the {POSSESSORS[poss_slug]['en']}'s {noun}"
    if poss_slug is None:
        return noun
    return f"{noun} {POSSESSORS[poss_slug][lang]}"


def demo_rows(seed: int = DEFAULT_SEED) -> list[dict]:
    """All corpus rows as JSONL-ready dicts, deterministic given the seed."""
    rng = random.Random(seed)
    color_slugs = sorted(COLORS)
    material_slugs = sorted(MATERIALS)

    facts = []  # (kind, noun_slug, poss_slug, property_slug, decoy_slug)
    phrases = [
        (noun, poss)
        for noun in sorted(NOUNS)
        for poss in [None] + sorted(POSSESSORS)
    ]
    for i, (noun, poss) in enumerate(phrases):
        table = color_slugs if i % 2 == 0 else material_slugs
        base_kind = "color" if i % 2 == 0 else "material"
        prop = rng.choice(table)
        if rng.random() < 0.5:
            decoy = rng.choice([s for s in table if s != prop])
            facts.append((f"{base_kind}_choice", noun, poss, prop, decoy))
        else:
            facts.append((base_kind, noun, poss, prop, None))
    for slug in sorted(LANDMARKS):
        facts.append(("where", slug, None, slug, None))

    ids = [f"q{i:04d}" for i in range(len(facts))]
    order = list(range(len(facts)))
    rng.shuffle(order)
    n_train = int(len(order) * 0.5)
    n_val = int(len(order) * 0.2)
    split_of = {}
    for pos, fact_idx in enumerate(order):
        if pos < n_train:
            split_of[fact_idx] = "train"
        elif pos < n_train + n_val:
            split_of[fact_idx] = "validation"
        else:
            split_of[fact_idx] = "test"

    rows = []
    for idx, (kind, subject, poss, prop, decoy) in enumerate(facts):
        for lang in LANGUAGES:
            if kind == "where":
                subject_phrase, answers = LANDMARKS[subject]
                question = TEMPLATES[kind][lang].format(obj=subject_phrase[lang])
                answer = answers[lang]
            else:
                obj = _object_phrase(subject, poss, lang)
                table = COLORS if kind.startswith("color") else MATERIALS
                answer = table[prop][lang]
                if decoy is None:
                    question = TEMPLATES[kind][lang].format(obj=obj)
                else:
                    # Present gold and decoy in a stable, arbitrary order.
                    a, b = sorted((table[prop][lang], table[decoy][lang]))
                    question = TEMPLATES[kind][lang].format(obj=obj, a=a, b=b)
            rows.append(
                {
                    "question_id": ids[idx],
                    "language": lang,
                    "split": split_of[idx],
                    "question": question,
                    "answer": answer,
                }
            )
    return rows


def write_corpus(path: str | Path, rows: Iterable[Mapping] | None = None,
                 seed: int = DEFAULT_SEED) -> int:
    """Write the fixture corpus as JSONL; returns the number of rows."""
    rows = list(rows) if rows is not None else demo_rows(seed)
    with Path(path).open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    return len(rows)


def demo_corpus(seed: int = DEFAULT_SEED) -> ParallelCorpus:
    """The fixture corpus as an in-memory ParallelCorpus."""
    items: dict[str, dict[str, QAItem]] = {}
    split_of: dict[str, str] = {}
    for row in demo_rows(seed):
        qid = row["question_id"]
        split_of[qid] = row["split"]
        items.setdefault(qid, {})[row["language"]] = QAItem(
            question_id=qid,
            language=row["language"],
            question=row["question"],
            answer=row["answer"],
            split=row["split"],
        )
    return ParallelCorpus(languages=LANGUAGES, items=items, split_of=split_of)


# Planted-label mix for constructed logs (fractions sum to 1).
LABEL_MIX = (
    ("correct_input_lang", 0.50),
    ("correct_english", 0.25),
    ("correct_other", 0.05),
    ("incorrect", 0.20),
)

_WRONG_OUTPUTS = ("i am not sure about this one", "42 oranges on a spaceship", "")


def _decorate(answer: str, variant: int) -> str:
    # All variants are invisible to the matcher's normalization and
    # first-line extraction, so the planted label survives by construction.
    if variant == 0:
        return answer
    if variant == 1:
        return f"  {answer}. "
    if variant == 2:
        return answer.upper()
    return f"{answer}.\nHere is some extra explanation that must be ignored."


def constructed_log(
    corpus: ParallelCorpus,
    input_language: str,
    seed: int = DEFAULT_SEED,
    model_tag: str = "constructed",
    question_ids: Iterable[str] | None = None,
) -> tuple[list[dict], dict[str, str]]:
    """Build a generation log with a known verdict label per record.

    Outputs are (decorated) gold answers of the intended output language, so
    the expected label is known by construction. Returns (records, expected
    label keyed by question id). Ids whose gold answers collide across
    languages get downgraded to a label that is actually plantable there.
    """
    from .textnorm import normalize  # local import keeps module load light

    rng = random.Random(seed)
    ids = sorted(question_ids) if question_ids is not None else sorted(corpus.eval_ids)
    records: list[dict] = []
    expected: dict[str, str] = {}

    for qid in ids:
        roll = rng.random()
        acc = 0.0
        label = LABEL_MIX[-1][0]
        for name, weight in LABEL_MIX:
            acc += weight
            if roll < acc:
                label = name
                break

        gold_in = corpus.gold_answer(qid, input_language)
        norm_in = normalize(gold_in)
        gold_en = corpus.gold_answer(qid, "en") if "en" in corpus.languages else None
        norm_en = normalize(gold_en) if gold_en is not None else None

        if label == "correct_english" and (
            input_language == "en" or norm_en is None or norm_en == norm_in
        ):
            label = "correct_input_lang"
        if label == "correct_other":
            choices = []
            for lang in corpus.languages:
                if lang in (input_language, "en"):
                    continue
                cand = normalize(corpus.gold_answer(qid, lang))
                if cand != norm_in and (norm_en is None or cand != norm_en):
                    choices.append(lang)
            if choices:
                other_lang = rng.choice(choices)
            else:
                label = "correct_input_lang"

        if label == "correct_input_lang":
            output = _decorate(gold_in, rng.randrange(4))
        elif label == "correct_english":
            output = _decorate(gold_en, rng.randrange(4))
        elif label == "correct_other":
            output = _decorate(corpus.gold_answer(qid, other_lang), rng.randrange(4))
        else:
            wrong = _WRONG_OUTPUTS[rng.randrange(len(_WRONG_OUTPUTS))]
            golds = {normalize(corpus.gold_answer(qid, l)) for l in corpus.languages}
            if normalize(wrong) in golds:  # freak collision: force a miss
                wrong = "no idea whatsoever"
            output = wrong

        expected[qid] = label
        records.append(
            {
                "question_id": qid,
                "input_language": input_language,
                "model_tag": model_tag,
                "output": output,
            }
        )
    return records, expected


def write_log(path: str | Path, records: Iterable[Mapping]) -> int:
    """Write generation records as JSONL; returns the number of records."""
    count = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
            count += 1
    return count
