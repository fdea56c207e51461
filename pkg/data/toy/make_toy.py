"""Regenerates the bundled toy corpus files in this directory.

The corpus is a small basketball world spanning all three source types, with
ten questions whose answers are present in the evidence. Run from the repo
root: ``python3 data/toy/make_toy.py``.
"""

import json
from pathlib import Path

HERE = Path(__file__).parent

ENTITIES = [
    {"id": "china", "label": "China", "aliases": ["Chinese"], "is_location": True},
    {"id": "nba", "label": "NBA", "aliases": ["National Basketball Association"], "is_location": False},
    {"id": "cba", "label": "CBA", "aliases": ["Chinese Basketball Association"], "is_location": False},
    {"id": "wang_zhizhi", "label": "Wang Zhizhi", "aliases": [], "is_location": False},
    {"id": "yao_ming", "label": "Yao Ming", "aliases": [], "is_location": False},
    {"id": "bayi", "label": "Bayi Rockets", "aliases": [], "is_location": False},
    {"id": "dallas", "label": "Dallas Mavericks", "aliases": ["Dallas", "Mavs"], "is_location": False},
    {"id": "houston", "label": "Houston Rockets", "aliases": ["Rockets"], "is_location": False},
    {"id": "shanghai_sharks", "label": "Shanghai Sharks", "aliases": ["Sharks"], "is_location": False},
    {"id": "shanghai", "label": "Shanghai", "aliases": [], "is_location": True},
    {"id": "beijing_ducks", "label": "Beijing Ducks", "aliases": ["Ducks"], "is_location": False},
    {"id": "beijing", "label": "Beijing", "aliases": [], "is_location": True},
    {"id": "li_nan", "label": "Li Nan", "aliases": [], "is_location": False},
    {"id": "dan_novak", "label": "Dan Novak", "aliases": [], "is_location": False},
    {"id": "mvp_award", "label": "CBA MVP Award", "aliases": ["MVP Award"], "is_location": False},
    {"id": "lithuania", "label": "Lithuania", "aliases": ["Lithuanian"], "is_location": True},
    {"id": "arvydas", "label": "Arvydas Kairys", "aliases": [], "is_location": False},
    {"id": "berlin_eagles", "label": "Berlin Eagles", "aliases": ["Eagles"], "is_location": False},
    {"id": "germany", "label": "Germany", "aliases": ["German"], "is_location": True},
]

FACTS = [
    {"id": "f1", "subject": "wang_zhizhi", "predicate": "member of sports team", "object": "bayi",
     "qualifiers": [["start time", "1995"], ["end time", "2001"]]},
    {"id": "f2", "subject": "wang_zhizhi", "predicate": "member of sports team", "object": "dallas",
     "qualifiers": [["start time", "2001"]]},
    {"id": "f3", "subject": "wang_zhizhi", "predicate": "award received", "object": "mvp_award",
     "qualifiers": [["point in time", "2000"]]},
    {"id": "f4", "subject": "wang_zhizhi", "predicate": "country of citizenship", "object": "china",
     "qualifiers": []},
    {"id": "f5", "subject": "yao_ming", "predicate": "member of sports team", "object": "shanghai_sharks",
     "qualifiers": [["start time", "1997"], ["end time", "2002"]]},
    {"id": "f6", "subject": "yao_ming", "predicate": "member of sports team", "object": "houston",
     "qualifiers": [["start time", "2002"], ["end time", "2011"]]},
    {"id": "f7", "subject": "yao_ming", "predicate": "country of citizenship", "object": "china",
     "qualifiers": []},
    {"id": "f8", "subject": "dan_novak", "predicate": "head coach of", "object": "dallas",
     "qualifiers": [["start time", "1999"], ["end time", "2004"]]},
    {"id": "f9", "subject": "arvydas", "predicate": "country of citizenship", "object": "lithuania",
     "qualifiers": []},
    {"id": "f10", "subject": "arvydas", "predicate": "member of sports team", "object": "berlin_eagles",
     "qualifiers": [["start time", "2005"]]},
    {"id": "f11", "subject": "li_nan", "predicate": "member of sports team", "object": "beijing_ducks",
     "qualifiers": [["start time", "2008"]]},
    {"id": "f12", "subject": "li_nan", "predicate": "country of citizenship", "object": "china",
     "qualifiers": []},
    {"id": "f13", "subject": "shanghai_sharks", "predicate": "league", "object": "cba", "qualifiers": []},
    {"id": "f14", "subject": "beijing_ducks", "predicate": "league", "object": "cba", "qualifiers": []},
    {"id": "f15", "subject": "berlin_eagles", "predicate": "headquarters location", "object": "germany",
     "qualifiers": []},
]

TABLES = [
    {"id": "t1", "page_title": "Wang Zhizhi", "dom_path": ["NBA Career"],
     "headers": ["Season", "Team", "Games Played"],
     "rows": [["2000-2001", "Dallas", "5"],
              ["2001-2002", "Dallas", "55"],
              ["2002-2003", "Dallas", "48"]]},
    {"id": "t2", "page_title": "Yao Ming", "dom_path": ["NBA Career"],
     "headers": ["Season", "Team", "Games Played"],
     "rows": [["2002-2003", "Houston Rockets", "82"],
              ["2003-2004", "Houston Rockets", "82"],
              ["2004-2005", "Houston Rockets", "80"]]},
    {"id": "t3", "page_title": "Beijing Ducks", "dom_path": ["Season records"],
     "headers": ["Year", "Player", "Points"],
     "rows": [["2011", "Wei Fan", "1350"],
              ["2012", "Li Nan", "1455"],
              ["2013", "Sun Yue", "1390"]]},
    {"id": "t4", "page_title": "CBA MVP Award", "dom_path": ["Winners"],
     "headers": ["Year", "Player"],
     "rows": [["1999", "Liu Wei"],
              ["2000", "Wang Zhizhi"],
              ["2001", "Yao Ming"]]},
]

TEXT_DOCS = [
    {"id": "d1", "page_title": "Wang Zhizhi", "dom_path": ["Career"], "sentences": [
        "Wang Zhizhi began his career with the Bayi Rockets in the CBA.",
        "Wang Zhizhi became the first Chinese player to appear in an NBA game.",
        "He was the first player from China in the league.",
        "Wang Zhizhi moved to the Dallas Mavericks as a free agent.",
        "Wang Zhizhi won the CBA MVP Award in 2000.",
    ]},
    {"id": "d2", "page_title": "Yao Ming", "dom_path": ["Career"], "sentences": [
        "Yao Ming played for the Shanghai Sharks of the Chinese Basketball Association before joining the NBA.",
        "Yao Ming was selected by the Houston Rockets in 2002.",
        "Standing at 2.29 m, Yao Ming was the tallest player on the Houston Rockets roster.",
        "Yao Ming won the CBA MVP Award in 2001.",
    ]},
    {"id": "d3", "page_title": "Shanghai Sharks", "dom_path": ["Overview"], "sentences": [
        "The Shanghai Sharks are a professional basketball club based in Shanghai.",
        "Shanghai is the home city of the Sharks.",
        "The Shanghai Sharks play in the Chinese Basketball Association.",
        "Before the NBA, Yao Ming belonged to the Shanghai Sharks of China.",
        "Yao Ming played for the Shanghai Sharks early in his career.",
    ]},
    {"id": "d4", "page_title": "Beijing Ducks", "dom_path": ["Overview"], "sentences": [
        "The Beijing Ducks are a basketball club from Beijing.",
        "Li Nan led the Beijing Ducks in scoring in 2012.",
    ]},
    {"id": "d5", "page_title": "Dallas Mavericks", "dom_path": ["History"], "sentences": [
        "Dan Novak coached the Dallas Mavericks from 1999 until 2004.",
        "Dan Novak was the head coach of the Dallas Mavericks in 2001.",
        "The Dallas Mavericks signed Wang Zhizhi from the Bayi Rockets.",
    ]},
    {"id": "d6", "page_title": "Arvydas Kairys", "dom_path": [], "sentences": [
        "Arvydas Kairys is a basketball center from Lithuania.",
        "The Berlin Eagles signed Arvydas Kairys in 2005.",
        "Arvydas Kairys started his career in Lithuania before moving to Germany.",
    ]},
    {"id": "d7", "page_title": "Berlin Eagles", "dom_path": ["History"], "sentences": [
        "The Berlin Eagles are a basketball club based in Germany.",
        "The Berlin Eagles won the national cup in 2007.",
    ]},
]

QUESTIONS = [
    {"id": "q01", "question": "Who was the first Chinese NBA player?", "answers": ["Wang Zhizhi"]},
    {"id": "q02", "question": "Which team selected Yao Ming in 2002?", "answers": ["Houston Rockets"]},
    {"id": "q03", "question": "Which Chinese team did Yao Ming play for before the NBA?",
     "answers": ["Shanghai Sharks"]},
    {"id": "q04", "question": "Who led the Beijing Ducks in scoring in 2012?", "answers": ["Li Nan"]},
    {"id": "q05", "question": "Which city are the Shanghai Sharks based in?", "answers": ["Shanghai"]},
    {"id": "q06", "question": "Who was the head coach of the Dallas Mavericks in 1999?",
     "answers": ["Dan Novak"]},
    {"id": "q07", "question": "Which award did Wang Zhizhi win in 2000?", "answers": ["CBA MVP Award"]},
    {"id": "q08", "question": "Who was the tallest player on the Houston Rockets roster?",
     "answers": ["Yao Ming"]},
    {"id": "q09", "question": "Which country is Arvydas Kairys from?", "answers": ["Lithuania"]},
    {"id": "q10", "question": "Which team signed Arvydas Kairys in 2005?", "answers": ["Berlin Eagles"]},
]


def write(name, records):
    path = HERE / name
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    print(f"{path}: {len(records)} records")


if __name__ == "__main__":
    write("catalog.jsonl", ENTITIES)
    write("kg.jsonl", FACTS)
    write("tables.jsonl", TABLES)
    write("text.jsonl", TEXT_DOCS)
    write("benchmark.jsonl", QUESTIONS)
