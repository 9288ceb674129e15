#!/usr/bin/env python3
"""Regenerates the synthetic corpora under fixtures/.

Output is deterministic; rerunning must not change the checked-in files.
"""
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "fixtures"

TOP_LEVEL = {
    "Arts": (["Music", "Movies"], "guitar band album song music movie film cinema actor theater painting gallery poetry novel orchestra jazz"),
    "Business": (["Finance", "Marketing"], "bank finance invest capital market trade consulting business company industry insurance loan accounting sales retail"),
    "Computers": (["Software", "Internet"], "software computer linux code program developer hosting server network internet data cloud compiler algorithm database"),
    "Games": (["Video_Games", "Board_Games"], "game games gaming puzzle chess poker arcade console player quest dungeon dragon card dice tabletop"),
    "Health": (["Medicine", "Fitness"], "health medical clinic doctor hospital nurse therapy fitness diet wellness medicine dental cancer heart care"),
    "Home": (["Gardening", "Cooking"], "garden gardening recipe recipes cooking kitchen home house family parenting decor furniture baking plants yard"),
    "News": (["Newspapers", "Magazines"], "news daily times herald gazette tribune journal press report headline magazine weekly post bulletin courier"),
    "Recreation": (["Travel", "Outdoors"], "travel hiking camping fishing outdoor boating hotel tour vacation trail cruise resort adventure climbing"),
    "Reference": (["Libraries", "Education"], "library dictionary encyclopedia archive reference museum school education university college academy research"),
    "Science": (["Biology", "Physics"], "science physics biology chemistry lab research genome astronomy quantum molecule ecology geology math"),
    "Shopping": (["Clothing", "Gifts"], "shop store buy shopping clothing fashion gifts jewelry shoes outlet deals boutique catalog wholesale"),
    "Society": (["Religion", "People"], "church religion faith society community people culture history heritage charity ministry family genealogy"),
    "Sports": (["Soccer", "Baseball"], "sports soccer football baseball basketball hockey tennis golf league team stadium athletics coach racing"),
}

SIZES = [60, 50, 45, 40, 40, 38, 36, 35, 35, 34, 32, 30, 25]
GENERIC = "online world best center info home web net my the club global new first".split()
TLDS = ["com"] * 6 + ["org"] * 2 + ["net", "co.uk", "ca", "com.au"]


def corpus13(rng):
    lines = ["# category\turi\ttitle\tdescription"]
    seen = set()
    pool = [w for _, v in TOP_LEVEL.values() for w in v.split()]
    for (top, (subs, vocab)), size in zip(TOP_LEVEL.items(), SIZES):
        words = vocab.split()
        made = 0
        while made < size:
            sub = subs[made % len(subs)]
            a, b, c = rng.sample(words, 3)
            # borrowed vocabulary keeps the classes from being trivially separable
            if rng.random() < 0.35:
                b = rng.choice(pool)
            if rng.random() < 0.35:
                c = rng.choice(pool)
            if rng.random() < 0.15:
                a = rng.choice(GENERIC + pool)
            g = rng.choice(GENERIC)
            tld = rng.choice(TLDS)
            form = rng.randrange(5)
            if form == 0:
                uri = f"http://www.{a}{b}.{tld}/"
            elif form == 1:
                uri = f"http://{a}-{g}.{tld}/{c}.html"
            elif form == 2:
                uri = f"http://{g}{a}.{tld}/{b}/{c}"
            elif form == 3:
                uri = f"http://www.{a}{rng.randrange(1, 99)}.{tld}/{b}-{c}.php"
            else:
                uri = f"http://{a}.{b}{g}.{tld}/"
            if uri in seen:
                continue
            seen.add(uri)
            lines.append(f"{top}/{sub}\t{uri}\t{a.title()} {b.title()}\t")
            made += 1
    return "\n".join(lines) + "\n"


LEAVES = {
    "Arts/North/Red": "ruby crimson scarlet cherry garnet maroon",
    "Arts/North/Blue": "azure cobalt navy sapphire indigo cerulean",
    "Arts/South/Green": "emerald jade olive forest mint lime",
    "Arts/South/Gold": "amber honey saffron mustard topaz golden",
    "Science/East/Granite": "granite basalt marble quartz slate shale",
    "Science/East/River": "river stream delta rapids estuary creek",
    "Science/West/Desert": "desert dune cactus oasis mesa canyon",
    "Science/West/Forest": "pine spruce cedar birch maple willow",
    "Recreation/Up/Falcon": "falcon hawk eagle osprey kestrel condor",
    "Recreation/Up/Owl": "owl barn tawny snowy horned screech",
    "Recreation/Down/Salmon": "salmon trout halibut mackerel herring sardine",
    "Recreation/Down/Whale": "whale orca dolphin narwhal beluga porpoise",
}


def taxonomy12(rng):
    lines = ["# category\turi\ttitle\tdescription"]
    for path, vocab in LEAVES.items():
        words = vocab.split()
        seen = set()
        while len(seen) < 20:
            a, b, c = rng.sample(words, 3)
            uri = f"http://{a}{b}.com/{c}"
            if uri in seen:
                continue
            seen.add(uri)
            lines.append(f"{path}\t{uri}\t{a.title()} {c.title()}\t")
    return "\n".join(lines) + "\n"


VA = "Computers/Computer_Science/Academic_Departments/North_America/United_States"

ODU_ONTOLOGY = [
    (f"{VA}/Virginia", "http://cs.gmu.edu", "George Mason University Computer Science", "Department of Computer Science in Fairfax, Virginia."),
    (f"{VA}/Virginia", "http://cs.odu.edu", "Old Dominion University Computer Science", "Computer science department in Norfolk, Virginia."),
    (f"{VA}/Virginia", "http://cs.virginia.edu", "University of Virginia Computer Science", "Computer science at the University of Virginia in Charlottesville."),
    (f"{VA}/Virginia", "http://cs.vt.edu", "Virginia Tech Computer Science", "Computer science department at Virginia Tech in Blacksburg."),
    (f"{VA}/Virginia", "http://wm.edu/as/computerscience/?svr=web", "College of William and Mary Computer Science", "Computer science in Williamsburg, Virginia."),
    (f"{VA}/Virginia", "http://radford.edu/content/csat/home/itec.html", "Radford University Information Technology", "Information technology department, Radford, Virginia."),
    (f"{VA}/Virginia", "http://cs.jmu.edu", "James Madison University Computer Science", "Computer science in Harrisonburg, Virginia."),
    (f"{VA}/Virginia", "https://php.radford.edu/~itec", "Radford University ITEC", "Information technology programs in Radford, Virginia."),
    (f"{VA}/Virginia", "http://mathcs.richmond.edu", "University of Richmond Mathematics and Computer Science", "Mathematics and computer science in Richmond, Virginia."),
    (f"{VA}/Virginia", "http://hollins.edu/academics/computersci", "Hollins University Computer Science", "Computer science at Hollins University in Roanoke, Virginia."),
    (f"{VA}/Maryland", "http://cs.umd.edu", "University of Maryland Computer Science", "Computer science in College Park, Maryland."),
    (f"{VA}/Maryland", "http://cs.jhu.edu", "Johns Hopkins University Computer Science", "Computer science in Baltimore, Maryland."),
    (f"{VA}/Maryland", "http://csee.umbc.edu", "UMBC Computer Science and Electrical Engineering", "Computer science in Baltimore County, Maryland."),
    (f"{VA}/Maryland", "http://cs.towson.edu", "Towson University Computer Science", "Computer science in Towson, Maryland."),
    (f"{VA}/North_Carolina", "http://cs.unc.edu", "UNC Chapel Hill Computer Science", "Computer science in Chapel Hill, North Carolina."),
    (f"{VA}/North_Carolina", "http://cs.duke.edu", "Duke University Computer Science", "Computer science in Durham, North Carolina."),
    (f"{VA}/North_Carolina", "http://csc.ncsu.edu", "NC State Computer Science", "Computer science in Raleigh, North Carolina."),
    (f"{VA}/North_Carolina", "http://cs.appstate.edu", "Appalachian State Computer Science", "Computer science in Boone, North Carolina."),
    ("Computers/Programming/Languages", "http://www.pythontutorials.com/", "Python tutorials", "Programming language tutorials."),
    ("Computers/Programming/Languages", "http://www.rust-lang.org/", "Rust", "A systems programming language."),
    ("Computers/Programming/Languages", "http://compilers.example.net/lisp", "Lisp compilers", "Lisp implementations."),
    ("Computers/Programming/Languages", "http://www.computerlanguages.com/", "Computer languages", "Directory of programming languages."),
    ("Computers/Hardware", "http://www.computerhardware.com/", "Computer hardware", "Hardware reviews."),
    ("Computers/Hardware", "http://compupc.net/motherboards", "Motherboards", "PC components."),
    ("Computers/Hardware", "http://www.computing-parts.com/", "Computing parts", "Parts for computers."),
    ("Arts/Music", "http://www.guitarworld.com/", "Guitar World", "Guitar magazine."),
    ("Arts/Music", "http://www.jazzalbums.org/", "Jazz albums", "Jazz recordings."),
    ("Arts/Music", "http://orchestra-online.com/symphony", "Orchestra", "Symphony orchestras."),
    ("Arts/Music", "http://songlyrics.net/", "Song lyrics", "Lyrics archive."),
    ("Sports/Baseball", "http://www.baseballstats.com/", "Baseball stats", "Statistics."),
    ("Sports/Baseball", "http://minorleaguebaseball.com/teams", "Minor league", "Teams."),
    ("Sports/Baseball", "http://www.pitchingcoach.org/", "Pitching coach", "Coaching."),
    ("Sports/Baseball", "http://homerunderby.net/", "Home run derby", "Derby results."),
    ("Science/Biology", "http://www.genomebrowser.org/", "Genome browser", "Genomes."),
    ("Science/Biology", "http://ecologylab.edu/", "Ecology lab", "Ecology research."),
    ("Science/Biology", "http://www.cellbiology.com/", "Cell biology", "Cells."),
    ("Science/Biology", "http://marinebiology.org/whales", "Marine biology", "Oceans."),
]

WIKIPEDIA = [
    {
        "official_uri": "http://odu.edu",
        "categories": ["Old Dominion University", "Universities and colleges in Virginia", "Educational institutions established in 1930"],
        "members": ["http://www.vt.edu", "http://www.virginia.edu", "http://www.gmu.edu", "http://www.jmu.edu", "http://www.wm.edu"],
    }
]

# (uri, pages) where each page is a list of 14-digit capture stamps.
TIMEMAPS = {
    "http://cs.gmu.edu": [["20020601120000", "20090315080000", "20131120101010", "20140310121212"]],
    "http://cs.odu.edu": [
        ["19970412000000", "20030101000000", "20080808080808"],
        ["20120505050505", "20140226090846", "20160101000000"],
    ],
    "http://cs.virginia.edu": [["19990101000000", "20110707070707", "20140208043915"]],
    "http://cs.vt.edu": [["20040404040404", "20130909090909"]],
    "http://wm.edu/as/computerscience/?svr=web": [["20140115101500"]],
    "http://radford.edu/content/csat/home/itec.html": [["20100210101010", "20150301000000"]],
    "http://cs.jmu.edu": [["20010101000000", "20140223213510"]],
    "http://hollins.edu/academics/computersci": [["20121212121212"]],
}

POPULARITY = [
    ("virginia.edu", 2500), ("vt.edu", 2100), ("gmu.edu", 4500), ("odu.edu", 9000),
    ("jmu.edu", 12000), ("wm.edu", 15000), ("richmond.edu", 20000), ("radford.edu", 40000),
    ("hollins.edu", 250000),
]

DAMAGE = {
    "20140226090846/http://cs.odu.edu:80/": 0.05,
    "20140208043915/http://cs.virginia.edu/": 0.13,
    "20140223213510/http://cs.jmu.edu/": 0.2,
    "20140310121212/http://cs.gmu.edu/": 0.35,
    "20130909090909/http://cs.vt.edu/": 0.1,
    "20140115101500/http://wm.edu/as/computerscience/?svr=web": 0.5,
    "20150301000000/http://radford.edu/content/csat/home/itec.html": 0.25,
}

MONTHS = "Jan Feb Mar Apr May Jun Jul Aug Sep Oct Nov Dec".split()
AGGREGATOR = "http://memgator.example/timemap/link"


def http_date(stamp):
    import datetime
    d = datetime.datetime.strptime(stamp, "%Y%m%d%H%M%S")
    day = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"][d.weekday()]
    return f"{day}, {d.day:02d} {MONTHS[d.month - 1]} {d.year} {d:%H:%M:%S} GMT"


def memento_uri(stamp, uri):
    if uri == "http://cs.odu.edu" and stamp == "20140226090846":
        return f"https://web.archive.org/web/{stamp}/http://cs.odu.edu:80/"
    target = uri if "/" in uri.split("://", 1)[1] else uri + "/"
    return f"https://web.archive.org/web/{stamp}/{target}"


def timemap_page(uri, stamps, page, pages):
    links = [f'<{uri}>; rel="original"']
    self_url = f"{AGGREGATOR}/{uri}" if page == 0 else f"{AGGREGATOR}/{page + 1}/{uri}"
    links.append(f'<{self_url}>; rel="self"; type="application/link-format"')
    if page + 1 < pages:
        links.append(f'<{AGGREGATOR}/{page + 2}/{uri}>; rel="next"; type="application/link-format"')
    for i, s in enumerate(stamps):
        rel = "memento"
        if page == 0 and i == 0:
            rel = "first memento"
        if page + 1 == pages and i == len(stamps) - 1:
            rel = "last memento" if rel == "memento" else "first last memento"
        links.append(f'<{memento_uri(s, uri)}>; rel="{rel}"; datetime="{http_date(s)}"')
    return ",\n".join(links) + "\n"


def odu(dir):
    import json
    dir.mkdir(exist_ok=True)
    rows = ["# category\turi\ttitle\tdescription"] + ["\t".join(r) for r in ODU_ONTOLOGY]
    (dir / "ontology.tsv").write_text("\n".join(rows) + "\n")
    (dir / "wikipedia.jsonl").write_text("".join(json.dumps(r) + "\n" for r in WIKIPEDIA))
    tm = dir / "timemaps"
    tm.mkdir(exist_ok=True)
    index = ["# key\tfile"]
    for n, (uri, pages) in enumerate(TIMEMAPS.items()):
        for p, stamps in enumerate(pages):
            name = f"tm{n:02d}_{p + 1}.link"
            (tm / name).write_text(timemap_page(uri, stamps, p, len(pages)))
            key = uri if p == 0 else f"{AGGREGATOR}/{p + 1}/{uri}"
            index.append(f"{key}\t{name}")
    (tm / "index.tsv").write_text("\n".join(index) + "\n")
    (dir / "popularity.tsv").write_text("# domain\trank\n" + "".join(f"{d}\t{r}\n" for d, r in POPULARITY))
    (dir / "damage.tsv").write_text(
        "# memento\tdamage\n" + "".join(f"https://web.archive.org/web/{k}\t{v}\n" for k, v in DAMAGE.items())
    )


def main():
    ROOT.mkdir(exist_ok=True)
    (ROOT / "corpus13.tsv").write_text(corpus13(random.Random(13)))
    (ROOT / "taxonomy12.tsv").write_text(taxonomy12(random.Random(12)))
    odu(ROOT / "odu")


if __name__ == "__main__":
    main()
