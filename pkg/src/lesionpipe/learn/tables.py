"""Column-wise joining of feature tables (hand-crafted + external features)."""

from ..cohort import FeatureTable


def join_feature_tables(tables: list) -> FeatureTable:
    """Concatenate tables keyed by case_id; feature-name sets must be disjoint.

    Row order follows the first table.
    """
    if not tables:
        raise ValueError("need at least one table")
    if len(tables) == 1:
        return tables[0]
    first = tables[0]
    ids = first.case_ids()
    id_set = set(ids)
    columns = list(first.columns)
    seen = set(columns)
    per_case = {cid: list(vals) for cid, vals in first.rows}
    for table in tables[1:]:
        other_ids = set(table.case_ids())
        if other_ids != id_set:
            missing = sorted(id_set ^ other_ids)
            raise ValueError(f"case_id sets differ between tables: {missing}")
        overlap = seen.intersection(table.columns)
        if overlap:
            raise ValueError(f"duplicate feature name(s) across tables: {sorted(overlap)}")
        seen.update(table.columns)
        columns.extend(table.columns)
        lookup = dict(table.rows)
        for cid in ids:
            per_case[cid].extend(lookup[cid])
    rows = tuple((cid, tuple(per_case[cid])) for cid in ids)
    return FeatureTable(columns=tuple(columns), rows=rows)
