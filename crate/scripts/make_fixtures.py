#!/usr/bin/env python3
"""Generates the bundled mini-KB, fixture image annotations and gold questions.

Output goes to crates/core/data/fixtures/. The curated part of the KB holds
every fact the gold questions depend on; the filler part pads the snapshot
with unrelated entities so the store works at a realistic size. Filler
entities never link to curated ones, so they cannot change a gold answer.
"""

import json
import random
import re
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "crates" / "core" / "data"
OUT = DATA / "fixtures"

R = "http://dbpedia.org/resource/"
P = {
    "label": "http://www.w3.org/2000/01/rdf-schema#label",
    "comment": "http://www.w3.org/2000/01/rdf-schema#comment",
    "redirect": "http://dbpedia.org/ontology/wikiPageRedirects",
    "subject": "http://purl.org/dc/terms/subject",
    "broader": "http://www.w3.org/2004/02/skos/core#broader",
    "link": "http://dbpedia.org/ontology/wikiPageWikiLink",
    "ingredient": "http://dbpedia.org/ontology/ingredient",
    "kingdom": "http://dbpedia.org/ontology/kingdom",
    "phylum": "http://dbpedia.org/ontology/phylum",
    "class": "http://dbpedia.org/ontology/class",
    "order": "http://dbpedia.org/ontology/order",
    "family": "http://dbpedia.org/ontology/family",
    "genus": "http://dbpedia.org/ontology/genus",
}

triples = []
labels = {}


def local(name):
    return name.replace(" ", "_")


def fact(s, p, o):
    triples.append((local(s), p, local(o), False))


def text(s, p, value):
    triples.append((local(s), p, value, True))


def label(name, value=None):
    """Labels an entity; categories get their name without the prefix."""
    n = local(name)
    if value is None:
        value = n.removeprefix("Category:").replace("_", " ")
    if n not in labels:
        labels[n] = value
        text(n, "label", value)


def subject(entity, *cats):
    for c in cats:
        fact(entity, "subject", "Category:" + c)


def broader(cat, *parents):
    for p in parents:
        fact("Category:" + cat, "broader", "Category:" + p)


def links(a, *others):
    for b in others:
        fact(a, "link", b)


# ----- curated facts -----

# Category hierarchy for animals, vehicles, places.
broader("Mammals", "Animals")
broader("Birds", "Animals")
broader("Domesticated_animals", "Animals")
broader("Mammals_of_Africa", "Mammals")
for c in ["Giraffes", "Zebras"]:
    broader(c, "Mammals")
for c in ["Horses", "Cattle", "Sheep", "Dogs"]:
    broader(c, "Mammals", "Domesticated_animals")
broader("Elephants", "Mammals")
broader("Road_vehicles", "Vehicles")
broader("Cars", "Road_vehicles")
broader("Buses", "Road_vehicles")
broader("Bicycles", "Human-powered_vehicles")
broader("Human-powered_vehicles", "Vehicles")
broader("Motorcycles", "Road_vehicles")
broader("Trains", "Rail_vehicles")
broader("Rail_vehicles", "Vehicles")
broader("Aircraft", "Vehicles")
broader("Railway_stations", "Rail_infrastructure")
broader("Rail_infrastructure", "Transport_infrastructure")
broader("Airports", "Aviation_infrastructure")
broader("Aviation_infrastructure", "Transport_infrastructure")
broader("Drinkware", "Kitchenware")
broader("Cutlery", "Kitchenware")
broader("Bowls", "Kitchenware")
broader("Kitchen_appliances", "Home_appliances")
broader("Tennis_equipment", "Sports_equipment")
broader("Table_tennis_equipment", "Sports_equipment")
broader("Computer_peripherals", "Computer_hardware")
broader("Laptops", "Computer_hardware")
broader("Italian_cuisine", "Cuisine")
broader("Religion", "Culture")

# Generic concepts questions refer to.
for n in ["Animal", "Mammal", "Vehicle", "Kitchenware", "Chordate", "Person", "Road", "Traffic",
          "Cooking", "Chef", "Restaurant", "Programmer", "Software", "Computer", "Savanna",
          "Kitchen", "Airport", "Railway station", "Tennis", "Religion", "Flying disc",
          "Computer mouse", "Fixed-wing aircraft", "Coca-Cola", "Mozzarella", "Dough",
          "Tomato sauce", "Tennis shoe", "Table tennis racket", "Yak", "Wolf", "Donkey", "Okapi",
          "Cutting", "Savanna"]:
    label(n)

# Taxonomy.
RANKS = ["kingdom", "phylum", "class", "order", "family", "genus"]
TAXA = {
    "Giraffe": ["Animal", "Chordate", "Mammal", "Even-toed ungulate", "Giraffidae", "Giraffa"],
    "Okapi": ["Animal", "Chordate", "Mammal", "Even-toed ungulate", "Giraffidae", "Okapia"],
    "Zebra": ["Animal", "Chordate", "Mammal", "Odd-toed ungulate", "Equidae", "Equus"],
    "Horse": ["Animal", "Chordate", "Mammal", "Odd-toed ungulate", "Equidae", "Equus"],
    "Donkey": ["Animal", "Chordate", "Mammal", "Odd-toed ungulate", "Equidae", "Equus"],
    "Cattle": ["Animal", "Chordate", "Mammal", "Even-toed ungulate", "Bovidae", "Bos"],
    "Yak": ["Animal", "Chordate", "Mammal", "Even-toed ungulate", "Bovidae", "Bos"],
    "Sheep": ["Animal", "Chordate", "Mammal", "Even-toed ungulate", "Bovidae", "Ovis"],
    "Dog": ["Animal", "Chordate", "Mammal", "Carnivora", "Canidae", "Canis"],
    "Wolf": ["Animal", "Chordate", "Mammal", "Carnivora", "Canidae", "Canis"],
    "Elephant": ["Animal", "Chordate", "Mammal", "Proboscidea", "Elephantidae", "Loxodonta"],
}
for animal, values in TAXA.items():
    label(animal)
    for rank, value in zip(RANKS, values):
        label(value)
        fact(animal, rank, value)
fact("Cow", "redirect", "Cattle")
label("Cow")

subject("Giraffe", "Giraffes", "Mammals_of_Africa")
subject("Okapi", "Mammals_of_Africa")
subject("Zebra", "Zebras", "Mammals_of_Africa")
subject("Horse", "Horses")
subject("Donkey", "Horses")
subject("Cattle", "Cattle")
subject("Sheep", "Sheep")
subject("Dog", "Dogs")
subject("Elephant", "Elephants", "Mammals_of_Africa")
text("Giraffe", "comment",
     "The giraffe is a tall African hoofed mammal, the tallest living terrestrial animal.")
text("Zebra", "comment", "Zebras are African equines with distinctive black-and-white striped coats.")
links("Giraffe", "Savanna")
links("Zebra", "Savanna")

# Street scene.
label("Car")
label("Bus")
label("Bicycle")
label("Motorcycle")
label("Traffic light")
subject("Car", "Cars", "German_inventions", "1886_introductions")
subject("Bus", "Buses", "1895_introductions")
subject("Bicycle", "Bicycles", "German_inventions", "1817_introductions")
subject("Motorcycle", "Motorcycles", "German_inventions", "1885_introductions")
subject("Traffic_light", "Road_traffic_management", "British_inventions", "1868_introductions")
subject("Coca-Cola", "Soft_drinks", "1886_introductions")
# Car -> Road is the only direct edge: total 50, not related.
links("Car", "Road", "Traffic", "Traffic_light")
links("Traffic", "Traffic_light")

# Rail and air.
label("Train")
label("Airplane")
fact("Airplane", "redirect", "Fixed-wing_aircraft")
subject("Train", "Trains", "British_inventions", "1804_introductions")
subject("Fixed-wing_aircraft", "Aircraft", "American_inventions", "1903_introductions")
subject("Railway_station", "Railway_stations")
subject("Airport", "Airports")
label("Suitcase")
subject("Suitcase", "Luggage")

# Kitchen vs office.
label("Knife")
label("Bowl")
label("Oven")
label("Cup")
label("Fork")
label("Wine glass")
label("Bottle")
subject("Knife", "Cutlery")
subject("Fork", "Cutlery")
subject("Bowl", "Bowls")
subject("Cup", "Drinkware")
subject("Wine_glass", "Drinkware")
subject("Oven", "Kitchen_appliances")
subject("Kitchen", "Rooms")
links("Chef", "Kitchen", "Knife", "Cooking", "Restaurant")
links("Kitchen", "Cooking", "Oven", "Restaurant")
links("Knife", "Cooking")
links("Restaurant", "Cooking")
label("Laptop")
label("Keyboard")
label("Mouse")
fact("Mouse", "redirect", "Computer_mouse")
subject("Laptop", "Laptops")
subject("Keyboard", "Computer_peripherals")
subject("Computer_mouse", "Computer_peripherals", "American_inventions", "1968_introductions")
subject("Computer", "Computer_hardware")
links("Programmer", "Computer", "Software")
links("Computer", "Software")
links("Laptop", "Computer")
links("Keyboard", "Computer")

# Tennis.
label("Tennis racket")
label("Tennis ball")
subject("Tennis_racket", "Tennis_equipment")
subject("Tennis_ball", "Tennis_equipment")
subject("Tennis_shoe", "Tennis_equipment")
subject("Table_tennis_racket", "Table_tennis_equipment")
links("Tennis", "Tennis_racket", "Tennis_ball")

# Food.
label("Pizza")
subject("Pizza", "Italian_cuisine")
for i in ["Dough", "Mozzarella", "Tomato_sauce"]:
    fact("Pizza", "ingredient", i)

# Redirect fixtures.
fact("Relig.", "redirect", "Religion")
label("Relig.")
subject("Religion", "Religion")
fact("Frisbee", "redirect", "Flying_disc")
label("Frisbee")
subject("Flying_disc", "Throwing_sports")

# Label every category used so far.
for s, p, o, lit in list(triples):
    for n in (s, o if not lit else None):
        if n and n.startswith("Category:"):
            label(n)

curated_labels = {v.lower() for v in labels.values()}
curated_names = set(labels)

# ----- filler -----

rng = random.Random(20151104)


def registry(path):
    rows = []
    for line in (DATA / path).read_text().splitlines():
        if line.strip() and not line.startswith("#"):
            a, b = line.split("\t")
            rows.append((a.strip(), b.strip()))
    return rows


SUPER_CATS = {
    "action": "Human_activities", "sport": "Sports", "scene": "Places", "object": "Objects",
}


def entity_name(lbl):
    n = re.sub(r"[^A-Za-z0-9_\-.]", "_", lbl.strip().replace(" ", "_"))
    return n[:1].upper() + n[1:]


filler = []
seen = set()
for lbl, sup in registry("classes.tsv") + registry("attributes.tsv"):
    if lbl.lower() in curated_labels or lbl.lower() in seen:
        continue
    seen.add(lbl.lower())
    name = entity_name(lbl)
    if name in curated_names:
        continue
    cat = SUPER_CATS.get(sup, entity_name(sup) + "_items")
    filler.append((name, lbl.capitalize(), cat))

THEMES = ["museum", "festival", "manufacturer", "history", "collection", "design", "industry",
          "championship", "exhibition", "magazine", "society", "market"]
base = [f for f in filler]
for name, lbl, _ in base:
    for theme in rng.sample(THEMES, 2):
        n = f"{name}_{theme}"
        filler.append((n, f"{lbl} {theme}", theme.capitalize() + "s"))

names = [f[0] for f in filler]
for name, lbl, cat in filler:
    label(name, lbl)
    text(name, "comment", f"{lbl} is a filler entry of the desk-scale snapshot.")
    subject(name, cat)
    label("Category:" + cat)
    for other in rng.sample(names, 2):
        if other != name:
            links(name, other)
for cat in sorted({f[2] for f in filler}):
    broader(cat, "Things")
label("Category:Things")

# ----- write -----


def iri(n):
    assert re.fullmatch(r"[A-Za-z0-9_\-.:]+", n), n
    return f"<{R}{n}>"


def lit(v):
    return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"@en'


OUT.mkdir(parents=True, exist_ok=True)
seen_triples = set()
lines = []
for s, p, o, is_lit in triples:
    line = f"{iri(s)} <{P[p]}> {lit(o) if is_lit else iri(o)} ."
    if line not in seen_triples:
        seen_triples.add(line)
        lines.append(line)
header = "# Desk-scale knowledge base snapshot for the fixture questions.\n"
(OUT / "mini_kb.nt").write_text(header + "\n".join(lines) + "\n")
print(f"mini_kb.nt: {len(lines)} triples")


# ----- images -----

def obj(i, lbl, sup, bbox, score=0.9, color=None):
    o = {"id": i, "label": lbl, "supercategory": sup, "bbox": bbox, "score": score}
    if color:
        o["color"] = color
    return o


def att(lbl, sup, score):
    return {"label": lbl, "supercategory": sup, "score": score}


IMAGES = [
    {"image_id": "two-animals", "width": 640, "height": 480, "objects": [
        obj(1, "giraffe", "animal", [40, 20, 220, 440], 0.95),
        obj(2, "zebra", "animal", [460, 220, 160, 180], 0.91, "black and white"),
    ], "attributes": [att("standing", "action", 0.8)], "scenes": [{"label": "savanna", "score": 0.7}]},
    {"image_id": "kitchen", "width": 640, "height": 480, "objects": [
        obj(1, "person", "person", [220, 40, 160, 420], 0.93),
        obj(2, "knife", "kitchen", [60, 330, 70, 20], 0.81),
        obj(3, "bowl", "kitchen", [420, 330, 90, 60], 0.85),
        obj(4, "oven", "appliance", [460, 90, 170, 170], 0.88),
    ], "attributes": [att("kitchen", "scene", 0.9), att("cutting", "action", 0.7)]},
    {"image_id": "office", "width": 640, "height": 480, "objects": [
        obj(1, "person", "person", [40, 60, 200, 400], 0.94),
        obj(2, "laptop", "electronic", [300, 200, 200, 140], 0.9),
        obj(3, "keyboard", "electronic", [290, 360, 180, 50], 0.8),
        obj(4, "mouse", "electronic", [500, 370, 30, 25], 0.75),
    ], "attributes": [att("computer", "object", 0.9), att("sitting", "action", 0.8), att("office", "scene", 0.6)]},
    {"image_id": "railway-station", "width": 640, "height": 480, "objects": [
        obj(1, "train", "vehicle", [20, 120, 600, 250], 0.96),
        obj(2, "person", "person", [500, 260, 60, 200], 0.8),
        obj(3, "person", "person", [420, 270, 50, 190], 0.77),
    ], "scenes": [{"label": "railway station", "score": 0.9}]},
    {"image_id": "airport", "width": 640, "height": 480, "objects": [
        obj(1, "airplane", "vehicle", [30, 40, 580, 220], 0.97),
        obj(2, "person", "person", [100, 280, 60, 190], 0.82),
        obj(3, "suitcase", "accessory", [170, 400, 50, 60], 0.7),
    ], "attributes": [att("airport", "scene", 0.92)]},
    {"image_id": "tennis", "width": 640, "height": 480, "objects": [
        obj(1, "person", "person", [250, 60, 150, 400], 0.95),
        obj(2, "tennis racket", "sports", [380, 120, 80, 110], 0.86),
        obj(3, "tennis ball", "sports", [520, 80, 20, 20], 0.72, "yellow"),
    ], "attributes": [att("tennis", "sport", 0.93), att("playing", "action", 0.85),
                      att("swinging", "action", 0.7), att("court", "scene", 0.6)]},
    {"image_id": "street", "width": 640, "height": 480, "objects": [
        obj(1, "car", "vehicle", [20, 260, 220, 140], 0.94, "red"),
        obj(2, "bus", "vehicle", [260, 150, 260, 220], 0.92, "white"),
        obj(3, "bicycle", "vehicle", [540, 330, 90, 80], 0.83),
        obj(4, "traffic light", "outdoor", [560, 20, 30, 90], 0.8),
        obj(5, "dog", "animal", [200, 410, 60, 50], 0.78, "brown"),
    ], "attributes": [att("city", "scene", 0.7)]},
    {"image_id": "dining", "width": 640, "height": 480, "objects": [
        obj(1, "pizza", "food", [180, 160, 280, 200], 0.96),
        obj(2, "cup", "kitchen", [500, 120, 70, 80], 0.85),
        obj(3, "fork", "kitchen", [80, 200, 40, 160], 0.8),
        obj(4, "wine glass", "kitchen", [540, 260, 60, 120], 0.77),
        obj(5, "bottle", "kitchen", [40, 20, 60, 170], 0.74),
    ], "attributes": [att("dining", "action", 0.7), att("restaurant", "scene", 0.65)]},
    {"image_id": "farm", "width": 640, "height": 480, "objects": [
        obj(1, "horse", "animal", [20, 100, 200, 220], 0.93),
        obj(2, "horse", "animal", [240, 120, 160, 190], 0.9),
        obj(3, "cow", "animal", [420, 140, 200, 180], 0.89),
        obj(4, "sheep", "animal", [300, 350, 110, 90], 0.85),
        obj(5, "dog", "animal", [120, 380, 70, 60], 0.8),
    ], "attributes": [att("field zoo", "scene", 0.5)]},
]

img_dir = OUT / "images"
img_dir.mkdir(exist_ok=True)
for old in img_dir.glob("*.json"):
    old.unlink()
for img in IMAGES:
    (img_dir / f"{img['image_id']}.json").write_text(json.dumps(img, indent=2) + "\n")
print(f"images: {len(IMAGES)}")


# ----- questions -----

def b(v):
    return {"kind": "boolean", "value": v}


def n(v):
    return {"kind": "count", "value": v}


def t(v):
    return {"kind": "text", "value": v}


def names_(*v):
    return {"kind": "name-list", "value": list(v)}


def ent(v):
    return {"kind": "entity-ref", "value": v}


def img_(v):
    return {"kind": "image-ref", "value": v}


def fail(v):
    return {"kind": "failure", "value": v}


V, C, K = "visual", "common-sense", "kb-knowledge"
QUESTIONS = [
    ("two-animals", "Is the right animal a zebra?", C, b(True)),
    ("two-animals", "How many animals are there in this image?", C, n(2)),
    ("two-animals", "What is the order of the giraffe?", K, t("Even-toed ungulate")),
    ("two-animals", "Are the giraffe and zebra in the same family?", K, b(False)),
    ("two-animals", "List the close relatives of the zebra", K, names_("Donkey", "Horse")),
    ("two-animals", "What is the giraffe?", V, t("tall African hoofed mammal")),
    ("two-animals", "What is the largest animal in this image?", V, ent("two-animals#1")),
    ("two-animals", "What do the giraffe and zebra have in common?", K, names_("Mammals", "Mammals of Africa")),
    ("two-animals", "Are all the animals mammals?", C, b(True)),
    ("kitchen", "What scene does this image describe?", V, names_("kitchen")),
    ("kitchen", "What is the person doing?", V, names_("cutting")),
    ("kitchen", "Is this image related to cooking?", C, b(True)),
    ("kitchen", "Which of the objects is most related to chef?", C, ent("kitchen#2")),
    ("kitchen,office", "Which of the two images is most related to chef?", C, img_("kitchen")),
    ("kitchen,office", "Which image is most related to programmer?", C, img_("office")),
    ("office", "When was the mouse first introduced?", K, t("1968")),
    ("office", "What objects can be found in this image?", V, names_("keyboard", "laptop", "mouse", "person")),
    ("railway-station,airport", "What do these two images have in common?", C, names_("Transport infrastructure")),
    ("railway-station", "Where was the train invented?", K, t("British")),
    ("tennis", "List all equipment I might use to play this sport", K, names_("Tennis ball", "Tennis racket", "Tennis shoe")),
    ("tennis", "What is the man doing?", V, names_("playing", "swinging")),
    ("tennis", "Is there any tennis racket in this image?", V, b(True)),
    ("tennis", "What color is the tennis ball?", V, t("yellow")),
    ("street", "What color is the car?", V, t("red")),
    ("street", "Is this image related to road?", C, b(False)),
    ("street", "Is this image related to traffic?", C, b(True)),
    ("street", "How many vehicles are there in this image?", C, n(3)),
    ("street", "Are there any animals in this image?", C, b(True)),
    ("street", "Which object was introduced earlier, the car or the bicycle?", K, t("Bicycle")),
    ("street", "List things introduced in the same year as the car", K, names_("Coca-Cola")),
    ("street", "Where was the traffic light invented?", K, t("British")),
    ("street", "Are the car and the bus the same thing?", V, b(False)),
    ("street", "Is the dog a kind of mammal?", C, b(True)),
    ("dining", "What are the ingredients of the pizza?", K, names_("Dough", "Mozzarella", "Tomato sauce")),
    ("dining", "How many cups are there?", V, n(1)),
    ("dining", "Is the cup a kind of kitchenware?", C, b(True)),
    ("dining", "Where was the fork invented?", K, fail("not-recorded")),
    ("farm", "Are all the horses animals?", C, b(True)),
    ("farm", "How many animals are there?", C, n(5)),
    ("farm", "Are horse and zebra in the same genus?", K, b(True)),
    ("farm", "What is the family of the sheep?", K, t("Bovidae")),
    ("farm", "Which animals are closely related to the cow?", K, names_("Yak")),
    ("farm", "What is the smallest animal in this image?", V, ent("farm#5")),
    ("farm", "Is there any giraffe in this image?", V, b(False)),
]

with open(OUT / "questions.jsonl", "w") as f:
    for i, (imgs, q, level, gold) in enumerate(QUESTIONS, 1):
        rec = {"qid": f"q{i:03d}", "images": imgs.split(","), "question": q, "level": level, "gold": gold}
        f.write(json.dumps(rec) + "\n")
print(f"questions: {len(QUESTIONS)}")
