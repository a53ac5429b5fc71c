#!/usr/bin/env python3
"""Generate the offline NOAA fixture corpus under fixtures/.

Outputs:
  fixtures/dublin_daily.csv      four sample years of Dublin temperatures
  fixtures/manston_daily.csv     four sample years of Manston temperatures
  fixtures/sculthorpe_daily.csv  1951/1955/1959/1963 with weather-type flags
  fixtures/cdo/cdo_page[1-4].json   paginated CDO API responses (Dublin slice)
  fixtures/cdo/manifest.json     page-level record counts
  fixtures/manifest.json         corpus-level counts used by the test suite

The corpus is deterministic: every cell derives from a per-(station, date)
seeded RNG. The script verifies, independently of the Rust code, that
  * July is the strict argmax of monthly medians for Dublin and Manston,
  * every weather label (rain, snow, fog, drizzle, sun) occurs in the
    Sculthorpe years under the classifier rule table,
and refuses to write anything if a property fails.
"""

import csv
import json
import math
import random
import statistics
from collections import Counter
from datetime import date, timedelta
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

TEMP_YEARS = [1980, 1993, 2006, 2019]
WEATHER_YEARS = [1951, 1955, 1959, 1963]

DUBLIN = {
    "id": "GHCND:EI000003969",
    "name": "PHOENIX PARK, EI",
    "lat": 53.364,
    "lon": -6.35,
    "mean": 9.5,
    "amplitude": 5.5,
    "sigma": 1.5,
    "wet": 0.52,
}
MANSTON = {
    "id": "GHCND:UKM00003797",
    "name": "MANSTON, UK",
    "lat": 51.346,
    "lon": 1.337,
    "mean": 10.6,
    "amplitude": 6.6,
    "sigma": 1.5,
    "wet": 0.44,
}
SCULTHORPE = {
    "id": "GHCND:UKE00105900",
    "name": "SCULTHORPE, UK",
    "lat": 52.86,
    "lon": 0.77,
    "mean": 8.5,
    "amplitude": 7.0,
    "sigma": 1.8,
    "wet": 0.55,
}

MISSING = ""
SENTINEL = "-9999"


def rng_for(station_id, day):
    return random.Random(f"fixture:{station_id}:{day.isoformat()}")


def days_of_year(year):
    d = date(year, 1, 1)
    while d.year == year:
        yield d
        d += timedelta(days=1)


def base_temperature(station, day, rng):
    doy = day.timetuple().tm_yday
    seasonal = station["amplitude"] * math.sin(2 * math.pi * (doy - 105) / 365.25)
    return station["mean"] + seasonal + rng.gauss(0, station["sigma"])


def day_cells(station, day, index, with_flags):
    """Returns a dict of column -> cell string for one day."""
    rng = rng_for(station["id"], day)
    temp = base_temperature(station, day, rng)
    spread = 2.5 + abs(rng.gauss(0, 1.0)) * 0.8
    tmax = round(temp + spread, 1)
    tmin = round(temp - spread, 1)
    cells = {"TMAX": f"{tmax:.1f}", "TMIN": f"{tmin:.1f}"}
    # Every 17th day drops TAVG so ingestion exercises the (TMAX+TMIN)/2 path.
    if index % 17 == 3:
        cells["TAVG"] = MISSING
    else:
        cells["TAVG"] = f"{round(temp, 1):.1f}"

    wet = rng.random() < station["wet"]
    if index % 41 == 7:
        cells["PRCP"] = SENTINEL
    elif wet:
        cells["PRCP"] = f"{round(0.2 + rng.expovariate(1 / 3.5), 1):.1f}"
    else:
        cells["PRCP"] = "0.0"

    if with_flags:
        effective = effective_temperature(cells)
        prcp = numeric(cells["PRCP"]) or 0.0
        flags = {
            "WT16": wet and effective is not None and effective > 1.0 and rng.random() < 0.55,
            "WT18": prcp > 0 and effective is not None and effective <= 0.5 and rng.random() < 0.85,
            "WT01": rng.random() < 0.30,
            "WT02": rng.random() < 0.08,
            "WT08": rng.random() < 0.45,
        }
        snowy = flags["WT18"]
        cells["SNOW"] = f"{round(prcp * 7.0, 1):.1f}" if snowy else "0.0"
        for code, value in flags.items():
            if value:
                cells[code] = "1"
            elif rng.random() < 0.02:
                cells[code] = "0"
            else:
                cells[code] = MISSING
    return cells


def numeric(cell):
    if cell in (MISSING, SENTINEL):
        return None
    return float(cell)


def effective_temperature(cells):
    tavg = numeric(cells.get("TAVG", MISSING))
    if tavg is not None:
        return tavg
    tmax = numeric(cells.get("TMAX", MISSING))
    tmin = numeric(cells.get("TMIN", MISSING))
    if tmax is not None and tmin is not None:
        return (tmax + tmin) / 2
    return None


def write_station_csv(path, station, years, with_flags):
    columns = ["STATION", "NAME", "LATITUDE", "LONGITUDE", "DATE", "TAVG", "TMAX", "TMIN", "PRCP"]
    if with_flags:
        columns += ["SNOW", "WT01", "WT02", "WT08", "WT16", "WT18"]
    rows = []
    index = 0
    for year in years:
        for day in days_of_year(year):
            cells = day_cells(station, day, index, with_flags)
            row = {
                "STATION": station["id"],
                "NAME": station["name"],
                "LATITUDE": f"{station['lat']}",
                "LONGITUDE": f"{station['lon']}",
                "DATE": day.isoformat(),
            }
            row.update(cells)
            rows.append(row)
            index += 1
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({c: row.get(c, MISSING) for c in columns})
    return rows


def count_observations(rows):
    """Mirrors ingestion: one observation per filled numeric cell, one per WT cell equal to 1."""
    total = 0
    tavg = 0
    flags = 0
    for row in rows:
        for code in ("TAVG", "TMAX", "TMIN", "PRCP", "SNOW"):
            if code in row and row[code] not in (MISSING, SENTINEL):
                total += 1
                if code == "TAVG":
                    tavg += 1
        for code in ("WT01", "WT02", "WT08", "WT16", "WT18"):
            if row.get(code, MISSING) == "1":
                total += 1
                flags += 1
    return total, tavg, flags


def monthly_medians(rows):
    by_month = {}
    for row in rows:
        temp = effective_temperature(row)
        if temp is None:
            continue
        month = int(row["DATE"][5:7])
        by_month.setdefault(month, []).append(temp)
    return {m: statistics.median(vs) for m, vs in sorted(by_month.items())}


def verify_july_argmax(name, rows):
    medians = monthly_medians(rows)
    if len(medians) != 12:
        raise SystemExit(f"{name}: expected samples in all 12 months, got {sorted(medians)}")
    july = medians[7]
    for month, value in medians.items():
        if month != 7 and value >= july:
            raise SystemExit(
                f"{name}: July median {july:.2f} is not a strict maximum "
                f"(month {month} has {value:.2f})"
            )


def classify(row):
    """Independent copy of the classifier rule table, for verification."""
    temp = effective_temperature(row) or 0.0
    prcp = numeric(row["PRCP"]) or 0.0
    if row.get("WT16") == "1" and prcp > 0 and temp > 0:
        return "rain"
    if row.get("WT18") == "1" and prcp > 0 and temp <= 0:
        return "snow"
    if row.get("WT01") == "1" or row.get("WT02") == "1":
        return "fog"
    if row.get("WT08") == "1":
        return "drizzle"
    return "sun"


def verify_all_labels(rows):
    counts = Counter(classify(row) for row in rows)
    missing = {"rain", "snow", "fog", "drizzle", "sun"} - set(counts)
    if missing:
        raise SystemExit(f"sculthorpe: labels never produced: {sorted(missing)}")
    return dict(sorted(counts.items()))


def cdo_records():
    """Dublin slice as CDO API entries: 4 datatypes per day, trimmed to 3250."""
    records = []
    day = date(1980, 1, 1)
    index = 0
    while len(records) < 3250:
        cells = day_cells(DUBLIN, day, index, with_flags=False)
        for code in ("PRCP", "TAVG", "TMAX", "TMIN"):
            if len(records) == 3250:
                break
            value = numeric(cells[code])
            if value is None:
                # The API omits missing values rather than sending sentinels.
                continue
            records.append(
                {
                    "date": f"{day.isoformat()}T00:00:00",
                    "datatype": code,
                    "station": DUBLIN["id"],
                    "attributes": ",,a,",
                    "value": value,
                }
            )
        day += timedelta(days=1)
        index += 1
    return records, day


def write_cdo_pages(records):
    (FIXTURES / "cdo").mkdir(parents=True, exist_ok=True)
    pages = []
    limit = 1000
    for number, offset in enumerate(range(0, len(records), limit), start=1):
        chunk = records[offset : offset + limit]
        body = {
            "metadata": {"resultset": {"offset": offset, "count": len(records), "limit": limit}},
            "results": chunk,
        }
        name = f"cdo_page{number}.json"
        with open(FIXTURES / "cdo" / name, "w") as fh:
            json.dump(body, fh, indent=1)
            fh.write("\n")
        pages.append({"file": name, "records": len(chunk), "offset": offset})
    manifest = {"count": len(records), "limit": limit, "pages": pages}
    with open(FIXTURES / "cdo" / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")
    return manifest


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    corpus = {"units": "metric", "csv": {}, "cdo": {}}

    for filename, station, years, with_flags in [
        ("dublin_daily.csv", DUBLIN, TEMP_YEARS, False),
        ("manston_daily.csv", MANSTON, TEMP_YEARS, False),
        ("sculthorpe_daily.csv", SCULTHORPE, WEATHER_YEARS, True),
    ]:
        rows = write_station_csv(FIXTURES / filename, station, years, with_flags)
        total, tavg, flags = count_observations(rows)
        entry = {
            "station_id": station["id"],
            "stations": 1,
            "rows": len(rows),
            "years": years,
            "observations": total,
            "tavg_observations": tavg,
            "expected_triples": 5 * 1 + 5 * total,
        }
        if with_flags:
            entry["wt_flag_observations"] = flags
            entry["label_counts"] = verify_all_labels(rows)
        else:
            verify_july_argmax(filename, rows)
        corpus["csv"][filename] = entry
        print(f"{filename}: rows={len(rows)} observations={total} tavg={tavg}")

    records, end_day = cdo_records()
    cdo_manifest = write_cdo_pages(records)
    distinct = {(r["station"], r["date"], r["datatype"]) for r in records}
    if len(distinct) != len(records):
        raise SystemExit("cdo: duplicate (station, date, datatype) entries")
    corpus["cdo"] = {
        "directory": "cdo",
        "station_id": DUBLIN["id"],
        "datatypes": ["PRCP", "TAVG", "TMAX", "TMIN"],
        "start": "1980-01-01",
        "end_exclusive": end_day.isoformat(),
        "total_records": len(records),
        "pages": len(cdo_manifest["pages"]),
    }
    print(f"cdo: records={len(records)} pages={len(cdo_manifest['pages'])}")

    with open(FIXTURES / "manifest.json", "w") as fh:
        json.dump(corpus, fh, indent=1)
        fh.write("\n")
    print("manifest written")


if __name__ == "__main__":
    main()
