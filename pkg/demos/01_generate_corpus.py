"""End-to-end synthetic NLI generation at desk scale, no model required.

Walks the full generation chain against the deterministic mock backend:
discover candidate domains, curate a roster, generate premises stratified
over (domain x length), then attach one (hypothesis, label) completion per
premise. Rerunning with the same seed reproduces every byte.
"""

from nliforge.corpus import compute_stats, format_stats
from nliforge.discovery import (
    build_discovery_prompt,
    curate_roster,
    load_default_seeds,
    sample_domain_triples,
    tally_domains,
)
from nliforge.gateway import Gateway, GatewayPolicy, MockBackend
from nliforge.labeling import label_premises
from nliforge.mockdata import discovery_generator, labeler_generator, premise_generator
from nliforge.premises import PremiseBatchSpec, audit_lengths, dedup_premises, generate_stratified

SEED = 42

# --- step 1: discover new domains ------------------------------------------
# The discovery prompt is the instruction plus 18 seed triples from 8
# domains; sampling it at temperature 1 yields (domain, length, text)
# triples whose domain names we tally.

seeds = load_default_seeds()
seed_names = tuple({s.domain for s in seeds})
gateway = Gateway(
    MockBackend(fallback=discovery_generator(seed_domains=seed_names), seed=SEED),
    policy=GatewayPolicy(rate_limit=None),
)
triples, failures = sample_domain_triples(gateway, n=200, seeds=seeds, base_seed=SEED)
tally = tally_domains(triples, seed_names)
print(f"sampled {len(triples)} triples ({len(failures)} parse failures)")
print(f"novel domains: {', '.join(tally.novel[:6])} ...")

# --- step 2: curate the roster ----------------------------------------------
# Curation is manual by design: near-paraphrase names ("travel forums" vs
# "us travel forums") are merged with include/exclude lists, not heuristics.

roster = curate_roster(tally, include=["recipe"], exclude=["us travel forums"])
print(f"curated roster: {len(roster)} domains")

# --- step 3: stratified premises --------------------------------------------
# Every (domain, length) cell is filled to the same quota; parse failures
# retry with a fresh sample, and anything left short lands in the report.

base_prompt = build_discovery_prompt(seeds)
premise_gateway = Gateway(
    MockBackend(fallback=premise_generator(), seed=SEED),
    policy=GatewayPolicy(rate_limit=None),
)
spec = PremiseBatchSpec(roster=roster, per_cell=3, seed=SEED)
premises, report = generate_stratified(premise_gateway, spec, base_prompt=base_prompt)
premises, removed = dedup_premises(premises)
audit = audit_lengths(premises)
print(f"premises: {len(premises)} ({removed} duplicates removed, "
      f"{len(report.shortfalls)} cells short)")
print("mean words by length:",
      {length.value: round(mean, 1) for length, mean in audit.mean_words.items()})

# --- step 4: hypotheses and labels ------------------------------------------
# Exactly one completion per premise; malformed completions are discarded
# and logged, never retried.

labeler_gateway = Gateway(
    MockBackend(fallback=labeler_generator(malformed_rate=0.01), seed=SEED),
    policy=GatewayPolicy(rate_limit=None),
)
result = label_premises(labeler_gateway, premises, base_seed=SEED)
print(f"labeled examples: {len(result.examples)} "
      f"(discard rate {result.discard_rate:.2%})")
if result.warning:
    print("!", result.warning)

print()
print(format_stats(compute_stats(list(result.examples))))
