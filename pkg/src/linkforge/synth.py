"""Seeded generators for synthetic bibliographic data.

``synthetic_clean_corpus`` builds a clean reference-style corpus with a
citation graph; ``junk_title`` and ``char_noise`` produce the kinds of
damage seen in automatically extracted headers. Everything is driven by
an explicit ``random.Random`` so output is reproducible byte for byte.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .corpus import CitationRecord, Corpus, PaperRecord, Role

FIELDS = {
    "databases": [
        "query optimization", "transaction processing", "data integration", "entity resolution",
        "schema matching", "index structures", "stream processing", "data cleaning",
        "join algorithms", "graph databases", "column stores", "query rewriting",
        "data provenance", "spatial databases", "key value stores", "approximate query answering",
        "concurrency control", "record linkage", "materialized views", "data lakes",
    ],
    "networks": [
        "sensor networks", "congestion control", "peer to peer systems", "wireless mesh networks",
        "routing protocols", "network coding", "software defined networking", "packet scheduling",
        "mobile ad hoc networks", "traffic classification", "content delivery networks",
        "vehicular networks", "network measurement", "cellular networks", "multicast routing",
        "bandwidth estimation", "delay tolerant networks", "optical networks", "network virtualization",
        "link prediction",
    ],
    "learning": [
        "neural networks", "support vector machines", "reinforcement learning", "active learning",
        "transfer learning", "topic models", "feature selection", "kernel methods",
        "gaussian processes", "ensemble methods", "semi supervised learning", "metric learning",
        "bayesian inference", "dimensionality reduction", "structured prediction",
        "online learning", "matrix factorization", "graphical models", "anomaly detection",
        "representation learning",
    ],
    "vision": [
        "image segmentation", "object detection", "optical flow", "stereo matching",
        "face recognition", "image retrieval", "scene understanding", "pose estimation",
        "image denoising", "visual tracking", "shape matching", "texture synthesis",
        "action recognition", "depth estimation", "image registration", "edge detection",
        "super resolution", "saliency detection", "camera calibration", "visual odometry",
    ],
    "systems": [
        "virtual machines", "file systems", "cache coherence", "memory allocation",
        "distributed storage", "fault tolerance", "load balancing", "thread scheduling",
        "garbage collection", "cloud computing", "energy management", "consensus protocols",
        "operating system kernels", "replication", "checkpointing", "resource provisioning",
        "cluster scheduling", "power capping", "persistent memory", "serverless computing",
    ],
    "security": [
        "intrusion detection", "malware analysis", "access control", "differential privacy",
        "side channel attacks", "authentication protocols", "secure multiparty computation",
        "software vulnerabilities", "information flow control", "botnet detection",
        "cryptographic protocols", "phishing detection", "trusted computing", "key management",
        "fuzz testing", "spam filtering", "privacy policies", "anonymous communication",
        "web security", "code obfuscation",
    ],
    "language": [
        "machine translation", "named entity recognition", "sentiment analysis", "question answering",
        "dependency parsing", "word embeddings", "text summarization", "coreference resolution",
        "speech recognition", "information extraction", "language modeling", "semantic role labeling",
        "text classification", "dialogue systems", "part of speech tagging", "word sense disambiguation",
        "relation extraction", "spelling correction", "discourse analysis", "morphological analysis",
    ],
    "theory": [
        "approximation algorithms", "graph coloring", "online algorithms", "randomized algorithms",
        "linear programming", "combinatorial optimization", "streaming algorithms", "property testing",
        "circuit complexity", "satisfiability solving", "network flows", "submodular maximization",
        "string matching", "computational geometry", "game theory", "mechanism design",
        "scheduling algorithms", "parameterized complexity", "spectral graph theory", "hashing schemes",
    ],
}

ADJECTIVES = [
    "Scalable", "Efficient", "Robust", "Distributed", "Adaptive", "Probabilistic", "Hierarchical",
    "Semantic", "Parallel", "Incremental", "Secure", "Lightweight", "Optimal", "Dynamic", "Sparse",
    "Interactive", "Approximate", "Fast", "Fault-Tolerant", "Energy-Efficient", "Privacy-Preserving",
    "Decentralized", "Real-Time", "Unsupervised", "Supervised", "Multi-Level", "Context-Aware",
    "Cost-Based", "Provably Good", "Randomized", "Declarative", "Generic", "Practical", "Accurate",
]
METHODS = [
    "Framework", "Algorithm", "Approach", "Model", "Architecture", "System", "Method", "Analysis",
    "Protocol", "Technique", "Scheme", "Heuristic", "Toolkit", "Benchmark", "Evaluation",
    "Estimator", "Representation", "Strategy", "Mechanism", "Formulation",
]
PROPERTIES = [
    "Complexity", "Convergence", "Robustness", "Limits", "Expressiveness", "Stability", "Hardness",
    "Accuracy", "Scalability", "Design", "Foundations", "Performance", "Correctness",
]
DOMAINS = [
    "Large Graphs", "the Cloud", "Mobile Devices", "Heterogeneous Clusters", "Digital Libraries",
    "Social Media", "Scientific Workflows", "Embedded Systems", "the Web", "Healthcare Records",
    "Data Centers", "Multicore Processors", "Smart Grids", "Biological Sequences", "Noisy Environments",
]
TEMPLATES = [
    "{adj} {topic} for {topic2}",
    "A {adj} {method} for {topic}",
    "On the {prop} of {adj} {topic}",
    "Towards {adj} {topic}: A {method} Based on {topic2}",
    "{topic}: {adj} {method}s and Applications",
    "Learning {topic} with {adj} {topic2}",
    "An Empirical Study of {topic} in {domain}",
    "{adj} and {adj2} {method}s for {topic} in {domain}",
    "Revisiting {topic} Using {topic2}",
    "{adj} {topic} over {domain}",
    "Improving {topic} through {adj} {topic2}",
    "A {method} of {topic} and {topic2}",
]

FIRST_NAMES = [
    "James", "Mary", "John", "Patricia", "Robert", "Jennifer", "Michael", "Linda", "David",
    "Elizabeth", "William", "Barbara", "Richard", "Susan", "Joseph", "Jessica", "Thomas", "Sarah",
    "Charles", "Karen", "Daniel", "Nancy", "Matthew", "Lisa", "Anthony", "Margaret", "Mark",
    "Sandra", "Paul", "Ashley", "Steven", "Kimberly", "Andrew", "Emily", "Kenneth", "Donna",
    "Joshua", "Michelle", "Kevin", "Carol", "Brian", "Amanda", "George", "Melissa", "Edward",
    "Deborah", "Ronald", "Stephanie", "Timothy", "Rebecca", "Jason", "Laura", "Jeffrey", "Helen",
    "Ryan", "Sharon", "Jacob", "Cynthia", "Gary", "Kathleen", "Nicholas", "Amy", "Eric", "Shirley",
    "José", "María", "François", "Zoë", "Jürgen", "Søren", "Łukasz", "Renée", "Héctor", "Inés",
    "Bjørn", "Chloé", "Agnès", "Björn", "Ana", "João", "Ángel", "Dmitri", "Olga", "Igor", "Natalia",
    "Wei", "Li", "Jian", "Xin", "Hao", "Yan", "Ming", "Jing", "Lei", "Yu", "Hiroshi", "Yuki", "Takeshi",
    "Akira", "Kenji", "Min-Jun", "Ji-Woo", "Seo-Yeon", "Arjun", "Priya", "Rahul", "Ananya", "Vikram",
    "Deepa", "Sanjay", "Lakshmi", "Ahmed", "Fatima", "Omar", "Layla", "Yusuf", "Amira", "Kwame",
    "Ama", "Chinedu", "Ngozi", "Lars", "Ingrid", "Sven", "Astrid", "Pieter", "Annelies", "Marco",
    "Giulia", "Luca", "Francesca", "Pablo", "Lucía", "Diego", "Camila", "Mateo", "Valentina",
    "Sofía", "Émile", "Céline", "Andrés", "Noor", "Tariq",
]
LAST_NAMES = [
    "Smith", "Johnson", "Williams", "Brown", "Jones", "Miller", "Davis", "Wilson", "Anderson",
    "Taylor", "Thomas", "Moore", "Martin", "Jackson", "Thompson", "White", "Harris", "Clark",
    "Lewis", "Robinson", "Walker", "Young", "Allen", "King", "Wright", "Scott", "Hill", "Green",
    "Adams", "Baker", "Nelson", "Carter", "Mitchell", "Roberts", "Turner", "Phillips", "Campbell",
    "Parker", "Evans", "Edwards", "Collins", "Stewart", "Morris", "Rogers", "Reed", "Cook",
    "Morgan", "Bell", "Murphy", "Bailey", "Cooper", "Richardson", "Cox", "Howard", "Ward",
    "Peterson", "Gray", "James", "Watson", "Brooks", "Kelly", "Sanders", "Price", "Bennett",
    "Wood", "Barnes", "Ross", "Henderson", "Coleman", "Jenkins", "Perry", "Powell", "Long",
    "Patterson", "Hughes", "Flores", "Washington", "Butler", "Simmons", "Foster", "Bryant",
    "Alexander", "Russell", "Griffin", "Hayes", "Myers", "Ford", "Hamilton", "Graham", "Sullivan",
    "Wallace", "Woods", "Cole", "West", "Jordan", "Owens", "Reynolds", "Fisher", "Ellis",
    "García", "Rodríguez", "Martínez", "Hernández", "López", "González", "Pérez", "Sánchez",
    "Ramírez", "Torres", "Díaz", "Gómez", "Jiménez", "Muñoz", "Álvarez", "Romero", "Navarro",
    "Müller", "Schmidt", "Schneider", "Fischer", "Weber", "Meyer", "Wagner", "Becker", "Schulz",
    "Hoffmann", "Schäfer", "Koch", "Bauer", "Richter", "Klein", "Wolf", "Schröder", "Neumann",
    "Dubois", "Lefèvre", "Moreau", "Laurent", "Girard", "Bonnet", "Dupont", "Lambert", "Fontaine",
    "Rossi", "Russo", "Ferrari", "Esposito", "Bianchi", "Romano", "Colombo", "Ricci", "Marino",
    "Kowalski", "Nowak", "Wiśniewski", "Wójcik", "Kowalczyk", "Kamiński", "Lewandowski",
    "Ivanov", "Smirnov", "Kuznetsov", "Popov", "Sokolov", "Lebedev", "Kozlov", "Novikov",
    "Wang", "Zhang", "Liu", "Chen", "Yang", "Huang", "Zhao", "Wu", "Zhou", "Xu", "Sun", "Ma",
    "Zhu", "Hu", "Guo", "He", "Lin", "Luo", "Gao", "Zheng", "Liang", "Xie", "Tang", "Han", "Feng",
    "Sato", "Suzuki", "Takahashi", "Tanaka", "Watanabe", "Ito", "Yamamoto", "Nakamura", "Kobayashi",
    "Kim", "Lee", "Park", "Choi", "Jung", "Kang", "Cho", "Yoon", "Jang", "Lim",
    "Sharma", "Patel", "Singh", "Kumar", "Gupta", "Reddy", "Rao", "Iyer", "Nair", "Mehta", "Joshi",
    "Nguyễn", "Trần", "Lê", "Phạm", "Hoàng", "Huỳnh", "Võ", "Đặng", "Bùi", "Đỗ",
    "O'Brien", "O'Connor", "McDonald", "MacLeod", "Van der Berg", "De Vries", "Jansen", "Bakker",
    "Smith-Jones", "Nielsen", "Hansen", "Andersen", "Larsen", "Johansson", "Karlsson", "Nilsson",
    "Silva", "Santos", "Oliveira", "Souza", "Pereira", "Costa", "Ferreira", "Almeida",
    "Okafor", "Mensah", "Adeyemi", "Mwangi", "Haddad", "Nasser", "Yilmaz", "Kaya", "Demir",
    "Bose", "Chatterjee", "Banerjee", "Okonkwo", "Eriksen", "Virtanen", "Horvat",
]
VENUES = [
    "Proceedings of the VLDB Endowment", "SIGMOD Conference", "ICDE", "KDD", "WWW", "NeurIPS",
    "ICML", "CVPR", "ICCV", "ACL", "EMNLP", "SIGCOMM", "INFOCOM", "OSDI", "SOSP", "USENIX Security",
    "CCS", "STOC", "FOCS", "SODA", "JCDL", "CIKM", "AAAI", "IJCAI", "IEEE Transactions on Knowledge "
    "and Data Engineering", "Machine Learning", "Journal of the ACM", "Communications of the ACM",
]
ABSTRACT_SENTENCES = [
    "We study the problem of {topic} and its relation to {topic2}.",
    "Existing approaches to {topic} suffer from high overhead in {domain}.",
    "In this paper we propose a {adj} {method} that addresses these limitations.",
    "Our {method} combines ideas from {topic2} with a novel {prop} analysis.",
    "We evaluate the approach on several datasets drawn from {domain}.",
    "Experiments show that our {method} outperforms the state of the art by a wide margin.",
    "We also prove bounds on the {prop} of the proposed {method}.",
    "The results suggest that {topic} benefits substantially from {adj} designs.",
    "Finally we discuss open problems in {topic2} and directions for future work.",
    "A prototype implementation demonstrates the practicality of the {method} in {domain}.",
]


def _title_case(phrase: str) -> str:
    return " ".join(w if w[:1].isupper() else w.capitalize() for w in phrase.split())


def _fill(template: str, rng: random.Random, field: str) -> str:
    topics = FIELDS[field]
    topic, topic2 = rng.sample(topics, 2)
    adj, adj2 = rng.sample(ADJECTIVES, 2)
    return template.format(
        topic=_title_case(topic), topic2=_title_case(topic2), adj=adj, adj2=adj2,
        method=rng.choice(METHODS), prop=rng.choice(PROPERTIES), domain=rng.choice(DOMAINS),
    )


def random_title(rng: random.Random, field: Optional[str] = None) -> str:
    field = field or rng.choice(sorted(FIELDS))
    title = _fill(rng.choice(TEMPLATES), rng, field)
    return title[0].upper() + title[1:]


def random_abstract(rng: random.Random, field: str, title: str) -> str:
    n = rng.randint(4, 7)
    sentences = [_fill(s, rng, field) for s in rng.sample(ABSTRACT_SENTENCES, n)]
    sentences.insert(0, f"This paper addresses {title.lower()}.")
    return " ".join(sentences)


@dataclass(frozen=True)
class Person:
    first: str
    middle: Optional[str]
    last: str

    def full(self) -> str:
        if self.middle:
            return f"{self.first} {self.middle}. {self.last}"
        return f"{self.first} {self.last}"


def random_person(rng: random.Random) -> Person:
    middle = rng.choice("ABCDEFGHJKLMNPRSTW") if rng.random() < 0.35 else None
    return Person(rng.choice(FIRST_NAMES), middle, rng.choice(LAST_NAMES))


def render_citation_author(p: Person, rng: random.Random) -> str:
    """Author as a reference string parser would emit it."""
    style = rng.random()
    initials = p.first[0] + (f". {p.middle}." if p.middle else ".")
    if style < 0.4:
        return f"{initials} {p.last}"
    if style < 0.7:
        return f"{p.last}, {initials}"
    return p.full()


@dataclass(frozen=True)
class Work:
    key: int
    title: str
    authors: Tuple[Person, ...]
    year: int
    field: str


def synthetic_clean_corpus(n_papers: int = 1100, seed: int = 2018, n_external: Optional[int] = None,
                           n_people: Optional[int] = None, citations: Tuple[int, int] = (8, 25),
                           citation_null_title_prob: float = 0.1, citation_null_year_prob: float = 0.05,
                           in_field_prob: float = 0.8, id_prefix: str = "p") -> Corpus:
    """Clean corpus of ``n_papers`` with titles, authors, abstracts and citations.

    Cited works come from the corpus itself and from a pool of external
    works; popularity is heavy tailed and mostly within a paper's field.
    Citation strings vary like parsed references do (initials, swapped
    name order, missing titles or years).
    """
    rng = random.Random(seed)
    n_external = 2 * n_papers if n_external is None else n_external
    n_people = max(50, int(1.5 * n_papers)) if n_people is None else n_people
    people = [random_person(rng) for _ in range(n_people)]
    fields = sorted(FIELDS)

    works: List[Work] = []
    seen = set()
    for key in range(n_papers + n_external):
        field = rng.choice(fields)
        while True:
            title = random_title(rng, field)
            if title.lower() not in seen:
                seen.add(title.lower())
                break
        authors = tuple(rng.sample(people, rng.choice([1, 2, 2, 3, 3, 3, 4, 4, 5])))
        works.append(Work(key, title, authors, rng.randint(1990, 2016), field))

    popularity = [rng.lognormvariate(0.0, 1.0) for _ in works]
    by_field = {f: [w for w in works if w.field == f] for f in fields}
    weights_by_field = {f: [popularity[w.key] for w in ws] for f, ws in by_field.items()}

    records = []
    for w in works[:n_papers]:
        pid = f"{id_prefix}{w.key:05d}"
        n_cites = rng.randint(*citations)
        cited = []
        chosen = {w.key}
        while len(cited) < n_cites:
            pool_field = w.field if rng.random() < in_field_prob else rng.choice(fields)
            c = rng.choices(by_field[pool_field], weights_by_field[pool_field])[0]
            if c.key not in chosen:
                chosen.add(c.key)
                cited.append(c)
        cites = tuple(
            CitationRecord(
                raw_id=f"{pid}#{i}",
                title=None if rng.random() < citation_null_title_prob else c.title,
                authors=tuple(render_citation_author(p, rng) for p in c.authors),
                year=None if rng.random() < citation_null_year_prob else c.year,
                cited_by=pid,
            )
            for i, c in enumerate(cited)
        )
        records.append(PaperRecord(
            id=pid, title=w.title, authors=tuple(p.full() for p in w.authors), year=w.year,
            venue=rng.choice(VENUES), abstract=random_abstract(rng, w.field, w.title), citations=cites,
        ))
    return Corpus(records, Role.REFERENCE)


# -- damage ------------------------------------------------------------------

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def char_noise(text: str, rate: float, rng: random.Random) -> str:
    """Substitute, delete or insert characters, each at probability ``rate``."""
    if rate <= 0 or not text:
        return text
    out = []
    for ch in text:
        r = rng.random()
        if r >= rate:
            out.append(ch)
            continue
        op = rng.random()
        if op < 0.5:
            out.append(rng.choice(_LETTERS))
        elif op < 0.75:
            continue
        else:
            out.append(ch)
            out.append(rng.choice(_LETTERS))
    return "".join(out)


def truncate_words(text: str, rng: random.Random, low: float = 0.4, high: float = 0.8) -> str:
    words = text.split()
    keep = max(1, int(round(len(words) * rng.uniform(low, high))))
    return " ".join(words[:keep])


def light_noise(title: str, rng: random.Random) -> str:
    if rng.random() < 0.3:
        title = truncate_words(title, rng, 0.5, 0.9)
    return char_noise(title, rng.uniform(0.01, 0.04), rng)


_NONASCII_POOLS = [
    "".join(chr(c) for c in range(0x4E00, 0x4E80)),   # CJK
    "".join(chr(c) for c in range(0x0410, 0x0450)),   # Cyrillic
    "".join(chr(c) for c in range(0x03B1, 0x03CA)),   # Greek
    "ÃÂâ€™œ©®¼½¾±×÷¿¡§¶�ﬁﬂ",                          # mojibake and ligatures
]

_HEADER_JUNK = [
    "Abstract", "ABSTRACT", "References", "REFERENCES", "Table of Contents", "List of Figures",
    "List of Tables", "Acknowledgments", "Acknowledgments and Notices", "Contents", "Summary",
    "Chapter {n}", "CHAPTER {n}", "Accepted for publication", "Discussions", "Null", "Authors",
    "Notices", "Chapter {n} Summary",
]
_VENUE_JUNK = [
    "Proceedings of the {n}th International Conference, pp. {p}-{q}",
    "Journal of Computing {n} ({y}) {p}-{q}",
    "Copyright © {y} ACM {n}-58113-{p}-{q}",
    "Technical Report TR-{y}-{n}",
    "In: Lecture Notes in Computer Science, vol. {p}, {y}",
    "Department of Computer Science, University of {place}",
    "{email}@cs.{place}.edu",
]
_PLACES = ["Springfield", "Riverside", "Lakeside", "Franklin", "Greenville", "Clinton", "Madison"]


@dataclass(frozen=True)
class JunkConfig:
    """Mix of low-quality title kinds, plus the non-ASCII share of that kind."""
    null_weight: float = 0.15
    nonascii_weight: float = 0.2
    irrelevant_weight: float = 0.4
    scrambled_weight: float = 0.25
    nonascii_share: Tuple[float, float] = (0.6, 1.0)


def _nonascii_string(rng: random.Random, share: Tuple[float, float]) -> str:
    pool = rng.choice(_NONASCII_POOLS)
    n = rng.randint(8, 60)
    frac = rng.uniform(*share)
    chars = [rng.choice(pool) if rng.random() < frac else rng.choice(_LETTERS + "  ") for _ in range(n)]
    return "".join(chars).strip() or pool[0]


def _scramble(title: str, rng: random.Random) -> str:
    words = []
    for w in title.split():
        letters = list(w)
        rng.shuffle(letters)
        words.append("".join(letters))
    if rng.random() < 0.5:
        rng.shuffle(words)
    return " ".join(words)


def _irrelevant(rng: random.Random, authors: Sequence[str]) -> str:
    r = rng.random()
    if r < 0.4 and authors:
        names = list(authors)
        text = ", ".join(names[:-1]) + (" and " if len(names) > 1 else "") + names[-1]
        return text if rng.random() < 0.5 else text.upper()
    if r < 0.75:
        return rng.choice(_HEADER_JUNK).format(n=rng.randint(1, 12))
    return rng.choice(_VENUE_JUNK).format(
        n=rng.randint(1, 40), p=rng.randint(10, 900), q=rng.randint(900, 999),
        y=rng.randint(1990, 2016), place=rng.choice(_PLACES),
        email=rng.choice(LAST_NAMES).lower().replace("'", ""))


def junk_title(rng: random.Random, cfg: JunkConfig = JunkConfig(), source_title: Optional[str] = None,
               authors: Sequence[str] = ()) -> Optional[str]:
    """A string that an extractor might wrongly report as the title.

    Irrelevant text prefers the record's own author list when one is given;
    scrambled text starts from ``source_title`` (or a random title).
    """
    kinds = ["null", "nonascii", "irrelevant", "scrambled"]
    weights = [cfg.null_weight, cfg.nonascii_weight, cfg.irrelevant_weight, cfg.scrambled_weight]
    kind = rng.choices(kinds, weights)[0]
    if kind == "null":
        return None if rng.random() < 0.7 else ""
    if kind == "nonascii":
        return _nonascii_string(rng, cfg.nonascii_share)
    if kind == "irrelevant":
        if not authors:
            authors = [random_person(rng).full() for _ in range(rng.randint(1, 4))]
        return _irrelevant(rng, authors)
    return _scramble(source_title or random_title(rng), rng)
