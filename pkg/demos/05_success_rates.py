# Success rates from the published tables, and where they disagree with the quoted percentages.
from yolotraffic.evaldata import embedded_dataset, figure6_report, rate_report, validate_dataset

records = embedded_dataset()
print("invariant failures:", validate_dataset(records))

for e in (1, 2):
    rep = rate_report(records, e)
    print(f"experiment {e}:", ", ".join(f"{r.distance_ft}ft {r.passes}/{r.total}" for r in rep.rows))

e3, e4 = figure6_report(records)
print("distance  exp3     exp4")
for r3, r4 in zip(e3.rows, e4.rows):
    print(f"{r3.distance_ft:5d}   {r3.rate_pct:6.2f}%  {r4.rate_pct:6.2f}%")
for note in e3.notes + e4.notes:
    print("note:", note)
