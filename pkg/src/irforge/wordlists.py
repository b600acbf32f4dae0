"""Bundled word data: keyword frequency table, abbreviations, mock vocabulary.

The frequency table lists common English surface forms with rough
per-million counts. Keyword selection treats any word missing from the
table as maximally rare, which is what makes topical or technical terms
win over everyday vocabulary.
"""

from __future__ import annotations

# fmt: off
KEYWORD_FREQUENCIES: dict[str, int] = {
    # nouns
    "time": 5200, "people": 4600, "year": 4500, "way": 3200, "day": 3100,
    "man": 2900, "thing": 2800, "woman": 2400, "life": 2300, "child": 2200,
    "world": 2100, "school": 1900, "state": 1800, "family": 1700,
    "student": 1600, "group": 1500, "country": 1500, "problem": 1400,
    "hand": 1400, "part": 1300, "place": 1300, "case": 1250, "week": 1200,
    "company": 1200, "system": 1150, "program": 1100, "question": 1100,
    "work": 1050, "government": 1050, "number": 1000, "night": 980,
    "point": 960, "home": 950, "water": 930, "room": 900, "mother": 880,
    "area": 860, "money": 850, "story": 830, "fact": 820, "month": 800,
    "right": 790, "study": 780, "book": 770, "eye": 760, "job": 750,
    "word": 740, "business": 730, "issue": 720, "side": 710, "kind": 700,
    "head": 690, "house": 680, "service": 670, "friend": 660,
    "father": 650, "power": 640, "hour": 630, "game": 620, "line": 610,
    "end": 600, "member": 590, "law": 580, "car": 570, "city": 560,
    "community": 550, "name": 540, "president": 530, "team": 520,
    "minute": 510, "idea": 500, "body": 490, "information": 480,
    "parent": 470, "face": 460, "level": 450, "office": 440, "door": 430,
    "health": 420, "person": 410, "art": 400, "war": 395, "history": 390,
    "party": 385, "result": 380, "change": 375, "morning": 370,
    "reason": 365, "research": 360, "girl": 355, "moment": 350,
    "air": 345, "teacher": 340, "force": 335, "education": 330,
    "countries": 320, "food": 315, "foot": 310,
    "boy": 305, "age": 300, "policy": 295, "process": 290, "music": 285,
    "market": 280, "sense": 275, "nation": 270, "plan": 265,
    "college": 260, "interest": 255, "death": 250, "experience": 245,
    "effect": 240, "use": 235, "class": 230, "control": 225, "care": 220,
    "field": 215, "development": 210, "role": 205, "effort": 200,
    "rate": 198, "heart": 196, "drug": 194, "show": 192, "leader": 190,
    "light": 188, "voice": 186, "wife": 184, "police": 182, "mind": 180,
    "price": 178, "report": 176, "decision": 174, "son": 172, "view": 170,
    "relationship": 168, "town": 166, "road": 164, "arm": 162,
    "difference": 160, "value": 158, "building": 156, "action": 154,
    "model": 152, "season": 150, "society": 148, "tax": 146,
    "director": 144, "position": 142, "player": 140, "record": 138,
    "paper": 136, "space": 134, "ground": 132, "practice": 130,
    "energy": 128, "period": 126, "course": 124, "economy": 122,
    "evidence": 120, "industry": 118, "method": 116, "methods": 115,
    "attention": 114, "activity": 112, "material": 110, "measure": 108,
    "measures": 107, "production": 106, "producing": 105, "source": 104,
    "technology": 102, "project": 100, "environment": 98, "purpose": 96,
    "approach": 94, "resource": 92, "protection": 90, "ignore": 88,
    "structure": 86, "growth": 84, "analysis": 82, "impact": 80,
    "benefit": 78, "strategy": 76, "century": 74, "product": 72,
    "region": 70, "species": 68, "knowledge": 66, "culture": 64,
    "science": 62, "medicine": 60, "transportation": 58,
    # adjectives and verbs
    "new": 2500, "good": 2300, "high": 1800, "old": 1600, "great": 1500,
    "big": 1300, "small": 1200, "large": 1100, "different": 1000,
    "important": 950, "young": 900, "national": 850, "long": 800,
    "little": 780, "political": 760, "bad": 740, "white": 720,
    "real": 700, "social": 680, "public": 660, "sure": 640, "low": 620,
    "early": 600, "able": 580, "human": 560, "local": 540, "late": 520,
    "hard": 500, "major": 480, "economic": 460, "strong": 440,
    "possible": 420, "whole": 400, "free": 380, "military": 360,
    "true": 340, "federal": 320, "international": 300, "full": 290,
    "special": 280, "easy": 270, "clear": 260, "recent": 250,
    "certain": 240, "personal": 230, "open": 220, "difficult": 210,
    "available": 200, "likely": 190, "short": 180, "single": 170,
    "medical": 160, "current": 150, "wrong": 140, "private": 130,
    "past": 120, "foreign": 110, "common": 100, "poor": 95,
    "natural": 90, "significant": 85, "similar": 80, "central": 75,
    "serious": 70, "ready": 65, "simple": 60, "physical": 55,
    "general": 50, "make": 2400, "get": 2300, "go": 2200, "know": 2100,
    "take": 2000, "see": 1900, "come": 1800, "think": 1700, "look": 1600,
    "want": 1500, "give": 1400, "find": 1300, "tell": 1200, "ask": 1100,
    "say": 2600, "become": 1000, "leave": 950, "feel": 900, "put": 850,
    "bring": 800, "begin": 750, "keep": 700, "hold": 650, "write": 600,
    "stand": 550, "hear": 500, "let": 480, "mean": 460, "set": 440,
    "meet": 420, "run": 400, "pay": 380, "sit": 360, "speak": 340,
    "lie": 320, "lead": 300, "read": 280, "grow": 260, "lose": 240,
    "fall": 220, "send": 200, "build": 190, "understand": 180,
    "follow": 170, "stop": 160, "create": 150, "allow": 140, "add": 130,
    "spend": 120, "talk": 110, "offer": 105, "consider": 100,
    "appear": 95, "buy": 90, "serve": 85, "die": 80, "expect": 75,
    "stay": 70, "happening": 68, "happen": 66, "produce": 64,
    "provide": 62, "include": 60, "continue": 58, "learn": 56,
    "support": 54, "reduce": 50, "ago": 48, "also": 46,
    "often": 44, "usually": 42, "existence": 38,
}
# fmt: on

# Suppress sentence splits after these. Matched against the whitespace-
# delimited token ending at the period, so "U.S." covers "U.S." itself.
ABBREVIATIONS = frozenset(
    [
        "Mr.", "Mrs.", "Ms.", "Dr.", "Prof.", "Sr.", "Jr.", "St.", "Mt.",
        "Gen.", "Rep.", "Sen.", "Gov.", "Capt.", "Col.", "Sgt.", "Lt.",
        "vs.", "etc.", "e.g.", "i.e.", "cf.", "al.", "approx.",
        "U.S.", "U.K.", "U.N.", "D.C.", "a.m.", "p.m.",
        "Inc.", "Ltd.", "Co.", "Corp.", "Dept.", "Est.",
        "Fig.", "No.", "Vol.", "pp.", "ed.",
        "Jan.", "Feb.", "Mar.", "Apr.", "Jun.", "Jul.", "Aug.", "Sep.",
        "Sept.", "Oct.", "Nov.", "Dec.",
    ]
)

_ONSETS = (
    "b c d f g h j k l m n p r s t v w z "
    "bl br ch cl cr dr fl fr gl gr pl pr sh sk sl sm sn sp st str sw th tr"
).split()
_NUCLEI = "a e i o u ai ea ee oa oo ou".split()
_CODAS = (
    " b ck d g k l ll m n nd ng nt p r rd rk rm rn rt s sh ss st t th x"
).split() + [""]


def build_vocabulary(size: int = 5000) -> tuple[str, ...]:
    """Deterministic pronounceable pseudo-word list for the mock provider."""
    syllables = [o + n + c for o in _ONSETS for n in _NUCLEI for c in _CODAS]
    count = len(syllables)
    vocab: list[str] = []
    seen: set[str] = set()
    i = 0
    while len(vocab) < size:
        word = syllables[(i * 257) % count]
        if i % 3 == 0:
            word += syllables[(i * 101 + 7) % count]
        if len(word) >= 3 and word not in seen:
            seen.add(word)
            vocab.append(word)
        i += 1
    return tuple(vocab)


MOCK_VOCABULARY = build_vocabulary()
