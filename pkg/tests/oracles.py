"""Reference implementations the test suite trusts.

Everything in here trades speed for obviousness: full link scans, nested
loops, no indexes, no memoization. The package code must agree with these
on every input the generators produce. None of it imports the modules it
checks beyond the plain data types.
"""

from itertools import product

from polyfed.catalog import NodeRef, Var, compute_link_id

# Family tags sort the same way the catalog's typed keys do:
# bool < float < int < node < str.
_FAMILY_RANK = {"bool": 0, "float": 1, "int": 2, "ref": 3, "str": 4}


def value_key(value):
    """Comparison key keeping value families apart (our own spelling)."""
    if isinstance(value, NodeRef):
        return ("ref", value.id)
    if isinstance(value, bool):
        return ("bool", value)
    if isinstance(value, int):
        return ("int", value)
    if isinstance(value, float):
        return ("float", value)
    return ("str", value)


def sort_key(value):
    family, raw = value_key(value)
    return (_FAMILY_RANK[family], raw)


def canonical_bindings(bindings):
    """Order-preserving canonical form for comparing binding lists."""
    return [
        tuple(sorted((name, value_key(v)) for name, v in binding.items()))
        for binding in bindings
    ]


# --- graph pattern oracle ----------------------------------------------------


def brute_force_match(catalog, pattern, distinct=False, order_by=None, context=None):
    """Evaluate a conjunctive pattern by scanning every link, every time."""
    links = catalog.links()
    if context is not None:
        members = set(catalog.context_members(context))
        links = [
            link
            for link in links
            if compute_link_id(link.subject, link.predicate, link.object) in members
        ]

    var_order = []
    for template in pattern:
        for position in (template.subject, template.object):
            if isinstance(position, Var) and position.name not in var_order:
                var_order.append(position.name)

    bindings = [{}]
    for template in pattern:
        bindings = [
            extended
            for binding in bindings
            for extended in _extend(links, template, binding)
        ]

    if distinct:
        seen, unique = set(), []
        for binding in bindings:
            key = tuple(value_key(binding[v]) for v in var_order)
            if key not in seen:
                seen.add(key)
                unique.append(binding)
        bindings = unique

    ordered = list(order_by or ())
    sort_vars = ordered + [v for v in var_order if v not in ordered]
    bindings.sort(key=lambda b: tuple(sort_key(b[v]) for v in sort_vars))
    return bindings


def _extend(links, template, binding):
    subject = template.subject
    if isinstance(subject, Var):
        bound = binding.get(subject.name)
        if bound is None:
            subject_id = None
        elif isinstance(bound, NodeRef):
            subject_id = bound.id
        else:
            return []  # literals never appear in subject position
    else:
        subject_id = subject

    target = template.object
    if isinstance(target, Var):
        object_value = binding.get(target.name)
    else:
        object_value = target

    out, seen = [], set()
    for edge in template.edges:
        for link in links:
            if link.predicate != edge.predicate:
                continue
            if edge.inverse:
                if not isinstance(link.object, NodeRef):
                    continue
                s, o = link.object.id, NodeRef(link.subject)
            else:
                s, o = link.subject, link.object
            if subject_id is not None and s != subject_id:
                continue
            if object_value is not None and value_key(o) != value_key(object_value):
                continue
            key = (s, value_key(o))
            if key in seen:
                continue  # both alternation branches found the same pair
            seen.add(key)
            extended = dict(binding)
            if isinstance(subject, Var):
                extended[subject.name] = NodeRef(s)
            if isinstance(target, Var):
                extended[target.name] = o
            out.append(extended)
    return out


# --- provenance traversal oracle ----------------------------------------------


def _capture_pattern(workflow_node, capture_edge):
    from polyfed.catalog import Edge, Template

    return [
        Template(Var("wfe"), (Edge("wasDerivedFromWorkflow"),), NodeRef(workflow_node)),
        Template(Var("dte"), (Edge("wasMemberOfWorkflowExecution"),), Var("wfe")),
        Template(Var("atv"), (capture_edge,), Var("dte")),
        Template(Var("atv"), (Edge("wasDerivedFromAttribute"),), Var("attr")),
        Template(Var("atv"), (Edge("value"),), Var("val")),
    ]


def brute_force_references(catalog, registry, workflow_node):
    """Identifier captures per (execution, store), straight off the graph.

    Walks workflow execution -> transformation execution -> attribute value
    with the brute-force matcher, keeps only values whose attribute is its
    dataset's identifier, and applies the generated-beats-used rule. The
    result maps execution id -> store -> set of (dataset, attribute, value)
    triples that survive; a set larger than one means the capture was
    ambiguous.
    """
    from polyfed.catalog import Edge

    per_direction = {}
    for direction, edge in (
        ("generated", Edge("wasGeneratedBy")),
        ("used", Edge("used", inverse=True)),
    ):
        found = {}
        pattern = _capture_pattern(workflow_node, edge)
        for binding in brute_force_match(catalog, pattern):
            ref = registry.attribute_ref(binding["attr"].id)
            if not ref.is_identifier:
                continue
            exec_id = binding["wfe"].id
            value = binding["val"]
            bucket = found.setdefault(exec_id, {}).setdefault(ref.store, {})
            bucket[(ref.dataset, ref.attribute, value_key(value))] = (
                ref.dataset,
                ref.attribute,
                value,
            )
        per_direction[direction] = found

    merged = {}
    executions = set(per_direction["generated"]) | set(per_direction["used"])
    for exec_id in executions:
        stores = {}
        generated = per_direction["generated"].get(exec_id, {})
        used = per_direction["used"].get(exec_id, {})
        for store in set(generated) | set(used):
            winner = generated.get(store) or used[store]
            stores[store] = set(winner.values())
        merged[exec_id] = stores
    return merged


# --- federated join oracle ------------------------------------------------------


def scalar_matches(value, op, literal):
    """Type-strict comparison, reimplemented from the documented contract."""

    def family(v):
        if isinstance(v, bool):
            return "bool"
        if isinstance(v, int):
            return "int"
        if isinstance(v, float):
            return "float"
        return "str"

    if op == "=":
        return family(value) == family(literal) and value == literal
    if op == "!=":
        return not scalar_matches(value, "=", literal)
    numeric = {"int", "float"}
    if family(value) in numeric and family(literal) in numeric:
        pass
    elif family(value) == "str" and family(literal) == "str":
        pass
    else:
        return False
    if op == "<":
        return value < literal
    if op == "<=":
        return value <= literal
    if op == ">":
        return value > literal
    if op == ">=":
        return value >= literal
    raise ValueError(op)


def brute_force_join(plan, adapters):
    """Nested-loop evaluation of a federated plan.

    Scans every participating dataset in full (never passing filters down),
    filters and joins with plain loops, and applies the same
    distinct-on-typed-values rule the executor documents. Returns the rows
    as a list of tuples.
    """
    tables = []
    for lq in plan.local_queries:
        columns = list(lq.projection)
        for f in lq.filters:
            if f.attribute not in columns:
                columns.append(f.attribute)
        raw = adapters[lq.store].scan(lq.dataset, columns)
        position = {c: i for i, c in enumerate(columns)}
        kept = [
            row
            for row in raw
            if all(
                scalar_matches(row[position[f.attribute]], f.op, f.value)
                for f in lq.filters
            )
        ]
        tables.append((lq, position, kept))

    out = []
    for constant_row in plan.constant_table.rows:
        reference = dict(zip(plan.constant_table.stores, constant_row))
        candidate_rows = []
        for lq, position, rows in tables:
            wanted = value_key(reference[lq.store])
            hits = [r for r in rows if value_key(r[position[lq.identifier]]) == wanted]
            if not hits:
                break
            candidate_rows.append(hits)
        else:
            for combination in product(*candidate_rows):
                chosen = {
                    (lq.store, lq.dataset): (position, row)
                    for (lq, position, _), row in zip(tables, combination)
                }
                out.append(
                    tuple(
                        chosen[(col.store, col.dataset)][1][
                            chosen[(col.store, col.dataset)][0][col.attribute]
                        ]
                        for col in plan.output_columns
                    )
                )

    if plan.distinct:
        seen, unique = set(), []
        for row in out:
            key = tuple(value_key(v) for v in row)
            if key not in seen:
                seen.add(key)
                unique.append(row)
        out = unique
    return out


def multiset(rows):
    """Row multiset keyed by typed values, for order-free comparison."""
    counts = {}
    for row in rows:
        key = tuple(value_key(v) for v in row)
        counts[key] = counts.get(key, 0) + 1
    return counts
