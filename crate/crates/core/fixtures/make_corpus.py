"""Writes corpus.jsonl for the two-genre test fixture (run once; output is committed)."""
import json

docs = [
  # non-fiction
  ("nf01", "A Treatise on Inoculation", "J. Haygarth", 1784, "nonfiction", [
    "The practice of inoculation for the small pox was brought into England from Constantinople, and has since been attended with great success among all ranks of people.",
    "The matter is taken from a mild pustule and introduced by a slight incision in the arm. The patient is prepared by a light diet and moderate purging.",
    "Physicians have observed that the inoculated disease is far milder than the natural small pox, and that the mortality is greatly reduced.",
  ]),
  ("nf02", "Observations on the Vaccine", "E. Jenner", 1798, "nonfiction", [
    "The cow pox, communicated from the udder of the cow to the hands of the milkers, appears to secure the constitution against the small pox.",
    "Vaccination produces a local pustule and a trifling fever, and the person so treated is afterwards found incapable of receiving the infection.",
    "Several dairy servants who had suffered the cow pox were inoculated without effect, which confirms the protective power of the vaccine.",
  ]),
  ("nf03", "An Account of the Southern Whale Fishery", None, 1812, "nonfiction", [
    "The southern whale fishery employs many ships from London and Nantucket, which sail round Cape Horn in pursuit of the spermaceti whale.",
    "The oil is boiled from the blubber on board the ship, and the casks are stowed in the hold until the voyage is complete.",
    "A successful voyage may last three years, and the profit is divided among the owners, the captain and the crew by shares called lays.",
  ]),
  ("nf04", "The Natural History of the Sperm Whale", "T. Beale", 1839, "nonfiction", [
    "The sperm whale is gregarious, and the females and young keep together in schools, while the old males wander alone.",
    "Spermaceti is found in the case in the head of the whale, and ambergris is sometimes taken from its intestines.",
    "The whale when struck dives to a great depth, and the line runs out of the boat with such speed that it must be wetted to prevent fire.",
  ]),
  ("nf05", "A Treatise on Tea", None, 1772, "nonfiction", [
    "Tea is the dried leaf of a shrub cultivated in China, and the green and bohea kinds differ chiefly in the manner of curing.",
    "The drinking of tea has become general among the common people, and some physicians complain that it weakens the nerves and the stomach.",
    "Great quantities are smuggled into the kingdom to avoid the duty, to the loss of the revenue and the ruin of the fair trader.",
  ]),
  ("nf06", "Remarks on the Poor Laws", None, 1817, "nonfiction", [
    "The poor rate has risen in every parish, and the overseers complain that relief given without labour encourages idleness.",
    "The workhouse was intended to set the able poor to work, but it has become a receptacle for the aged, the infirm and the children of the parish.",
    "Some reformers propose that relief be refused to the able bodied, while others hold that wages must first be raised by law.",
  ]),
  ("nf07", "A System of Phrenology", "G. Combe", 1825, "nonfiction", [
    "Phrenology teaches that the brain is the organ of the mind, and that each faculty has its seat in a particular part of the brain.",
    "The size of each organ may be judged by the form of the skull, so that the character of a person may be read from the head.",
    "Critics answer that the skull does not follow the surface of the brain, and that the doctrine leads to materialism.",
  ]),
  ("nf08", "On the Game of Chess", None, 1808, "nonfiction", [
    "Chess is a game of pure skill in which neither party can blame fortune, and it has been played in Persia and India from ancient times.",
    "The pieces are the king, the queen, the rooks, the bishops, the knights and the pawns, and each moves after its own manner.",
    "A good player will consider the consequences of every move and will not attack before his pieces are brought into play.",
  ]),
  ("nf09", "Domestic Medicine", "W. Buchan", 1790, "nonfiction", [
    "Fevers are the most common diseases, and the patient should be kept cool, given plenty of diluting drink and a light diet.",
    "In the small pox the chief danger arises from the hot regimen, and fresh air is of great benefit to the patient.",
    "Mothers ought to nurse their own children, and the custom of putting infants out to nurse is the cause of many deaths.",
  ]),
  ("nf10", "Letters on Education", None, 1790, "nonfiction", [
    "The education of girls is too often confined to music, dancing and needlework, while the understanding is neglected.",
    "Children should be taught to reason early, and their curiosity ought to be encouraged rather than silenced.",
    "A public school gives boys independence, but a private tutor may better attend to their morals and their studies.",
  ]),
  # fiction
  ("f01", "The Captain's Daughter", None, 1821, "fiction", [
    "Captain Harrowgate stood upon the quarterdeck and watched the whale spout to leeward, while Miss Ellery clung to the rail in terror.",
    "Lower away, cried the mate, and the boats dropped into the sea; the harpooner stood ready with his iron poised above the waves.",
    "That night she wept in her cabin, for the smell of the boiling blubber and the groans of the dying whale were more than she could bear.",
  ]),
  ("f02", "Nantucket Tales", None, 1834, "fiction", [
    "Old Starbridge had sailed thrice round the Horn, and he swore that the great white whale had stove his boat off the coast of Peru.",
    "The widows of the island walked upon the roofs of their houses, watching the harbour for sails that would never return.",
    "The boy Ezekiel longed for the sea, though his mother begged him to stay and keep the shop upon the wharf.",
  ]),
  ("f03", "The Village Doctor", None, 1801, "fiction", [
    "Doctor Pellworth rode through the snow to the cottage, where the child lay burning with the small pox and the mother prayed beside her.",
    "I will inoculate the whole village, said he, and the farmers murmured that he would bring the pestilence upon them all.",
    "When spring came and not one of the inoculated children had died, the parson preached a sermon in praise of the doctor's courage.",
  ]),
  ("f04", "Emmeline, or the Orphan", "C. Smith", 1788, "fiction", [
    "Emmeline was an orphan, brought up in the parish workhouse among the aged and the infirm, until a lady of fortune took pity on her.",
    "The overseers had apprenticed her to a mantua maker, where she sewed from dawn until midnight for a crust and a cup of weak tea.",
    "Her benefactress gave her books, and Emmeline read by candlelight, dreaming of a life beyond the grey walls of the poorhouse.",
  ]),
  ("f05", "A Dish of Tea", None, 1776, "fiction", [
    "Lady Belvoir poured the tea with a steady hand, though her heart beat quickly when Mr. Farnaby entered the drawing room.",
    "The gossips of the assembly declared that the bohea was smuggled, and that the squire himself had met the smugglers at the cove.",
    "Over the teacups the ladies decided the fate of every marriage in the county before the candles were lit.",
  ]),
  ("f06", "The Phrenologist", None, 1836, "fiction", [
    "Professor Quillane ran his fingers over my skull and declared that my organ of acquisitiveness was uncommonly large.",
    "He had a plaster head marked in compartments upon his table, and he charged a shilling for every reading of character.",
    "My aunt believed every word, and refused to engage a servant until the professor had examined the girl's head.",
  ]),
  ("f07", "The Chess Player", None, 1827, "fiction", [
    "The automaton sat behind its cabinet, a Turk in a turban, and moved the chess pieces with its wooden hand while the crowd gasped.",
    "I played against it for an hour, and the machine checkmated my king with a knight that I had thought harmless.",
    "Later I learned that a small man had been hidden within the cabinet, directing every move by candlelight.",
  ]),
  ("f08", "Tales of the Parish", None, 1830, "fiction", [
    "The parish beadle drove the vagrant from the village, for the overseers would not have another pauper upon the rates.",
    "Goody Marlow, who had nursed half the children of the parish, ended her days in the workhouse with a shilling a week.",
    "The squire's son, returning from his school, was shocked to see the old nurse in the pauper's grey.",
  ]),
]

with open("corpus.jsonl", "w", encoding="utf-8") as out:
    for doc_id, title, author, year, genre, paras in docs:
        rec = {"doc_id": doc_id, "title": title, "genre": genre, "year": year, "text": "\n\n".join(paras)}
        if author:
            rec["author"] = author
        out.write(json.dumps(rec, ensure_ascii=False) + "\n")
