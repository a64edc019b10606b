#!/usr/bin/env python3
"""Writes the deployment scenario fixtures into fixtures/."""

import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "fixtures"
TRANSECTS = "ABCDEF"

SITES = {
    "GN13": {
        "id": "GN13",
        "plots": ["GN1", "GN2", "GN3"],
        "gateway_position": [0.0, 0.0],
        "node_area_center": [200.0, 0.0],
        "max_span_m": 200.0,
        "foliage_blockage": True,
        "snow_scale": 1.0,
    },
    "GN45": {
        "id": "GN45",
        "plots": ["GN4", "GN5", "NX"],
        "gateway_position": [0.0, 0.0],
        "node_area_center": [0.0, 0.0],
        "max_span_m": 150.0,
        "foliage_blockage": False,
        "snow_scale": 1.0,
    },
    "GO": {
        "id": "GO",
        "plots": ["GO1", "GO2", "GO3", "GO4"],
        "gateway_position": [0.0, 0.0],
        "node_area_center": [0.0, 0.0],
        "max_span_m": 150.0,
        "foliage_blockage": False,
        "snow_scale": 1.0,
    },
}

SOIL_PLOTS = {"GN13": ["GN1", "GN2", "GN3"], "GN45": ["GN4", "GN5"], "GO": ["GO1", "GO2", "GO3", "GO4"]}
EXTRA = {
    "GN13": [("GN13-W", "WaterContent")],
    "GN45": [("GN45-W", "WaterContent"), ("GN45-WX", "Weather")],
    "GO": [("GO-W", "WaterContent")],
}
GATEWAY_IDS = {"GN13": 0x2001, "GN45": 0x2002, "GO": 0x2003}
FIRST_NODE_ID = {"GN13": 0x1000, "GN45": 0x1100, "GO": 0x1200}


def nodes_for(site, deployed_at=None):
    out = []
    next_id = FIRST_NODE_ID[site]
    for plot in SOIL_PLOTS[site]:
        for t in TRANSECTS:
            node = {"id": next_id, "name": f"{plot}{t}", "site": site, "plot": plot, "transect": t,
                    "kind": "SoilTemp"}
            if deployed_at:
                node["deployed_at"] = deployed_at
            out.append(node)
            next_id += 1
    for name, kind in EXTRA[site]:
        node = {"id": next_id, "name": name, "site": site, "kind": kind}
        if deployed_at:
            node["deployed_at"] = deployed_at
        out.append(node)
        next_id += 1
    return out


def gateway_for(site, deployed_at=None):
    gw = {"id": GATEWAY_IDS[site], "name": f"GW-{site}", "site": site}
    if deployed_at:
        gw["deployed_at"] = deployed_at
    return gw


def single_site(site, start, end):
    return {
        "seed": 2021,
        "start": start,
        "end": end,
        "sites": [SITES[site]],
        "nodes": nodes_for(site),
        "gateways": [gateway_for(site)],
        "faults": [],
    }


def deployment():
    nodes = nodes_for("GN13") + nodes_for("GN45", "2021-11-15") + nodes_for("GO", "2021-11-15")
    faults = [
        {"kind": "AntennaDetach", "target": "GW-GO", "start": "2022-11-10"},
        {"kind": "AntennaDetach", "target": "GW-GN45", "start": "2023-04-10", "end": "2023-05-10"},
    ]
    for n in nodes:
        if n["site"] == "GO":
            move = {"kind": "NodeRelocation", "target": n["name"], "start": "2023-07-01", "to_site": "GN45"}
            if "plot" in n:
                move["to_plot"] = "NX"
            faults.append(move)
    faults += [
        {"kind": "BatteryReplace", "target": "GN2A", "start": "2023-07-15"},
        {"kind": "PowerStationFailure", "target": "GW-GN45", "start": "2023-11-05", "end": "2024-04-10"},
    ]
    return {
        "seed": 2021,
        "start": "2021-04-20",
        "end": "2024-04-20",
        "sites": [SITES["GN13"], SITES["GN45"], SITES["GO"]],
        "nodes": nodes,
        "gateways": [gateway_for("GN13"), gateway_for("GN45", "2022-08-15"), gateway_for("GO", "2022-08-15")],
        "faults": faults,
    }


def minimal():
    return {
        "seed": 1,
        "start": "2024-01-01",
        "end": "2024-01-02",
        "sites": [{"id": "S1", "plots": ["P1"]}],
        "nodes": [{"id": 1, "name": "N1", "site": "S1", "plot": "P1", "transect": "A"}],
        "gateways": [{"id": 2, "name": "G1", "site": "S1"}],
    }


def main():
    OUT.mkdir(exist_ok=True)
    files = {
        "gn13.json": single_site("GN13", "2021-04-20", "2022-04-20"),
        "gn45.json": single_site("GN45", "2022-08-15", "2023-08-15"),
        "go.json": single_site("GO", "2022-08-15", "2023-08-15"),
        "deployment.json": deployment(),
        "minimal.json": minimal(),
    }
    for name, doc in files.items():
        (OUT / name).write_text(json.dumps(doc, indent=2) + "\n")


if __name__ == "__main__":
    main()
