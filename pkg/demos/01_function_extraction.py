"""Deriving state probes from code: class detection and function extraction.

The shopping-cart subject bundled with the package is a two-class program
(a Cart holding Product refs).  This script walks the front half of the
pipeline: parse the program, find the classes that matter for a monitoring
target, symbolically execute their methods, and turn the explored path
conditions into parameter-free abstraction functions.
"""

from importlib import resources

from burstmine import (build_dependency_graph, detect_relevant_classes,
                       extract_abstraction_functions, parse_program,
                       symbolic_execute)

source = resources.files("burstmine.data").joinpath("cart.mir").read_text()
print(source)

program = parse_program(source)
print("classes:", ", ".join(program.class_names))

# Step 1: which classes can influence the monitored component?  Edges follow
# field types, parameter types, and cross-class reads in expressions.
graph = build_dependency_graph(program)
print("dependency edges:", graph.edges)
relevant = detect_relevant_classes(graph, {"Cart"})
print("relevant classes for target {Cart}:", relevant)

# Step 2 (raw): each method is explored symbolically; every entry-to-exit
# path, defensive abort, and bound truncation yields one condition.
cart = program.classes[0]
for method in cart.methods:
    paths, report = symbolic_execute(method, program)
    print(f"\n{cart.name}.{method.name}: {len(paths)} path conditions"
          f"{' (loop truncated)' if report.truncated else ''}")
    for pc in paths:
        flag = "  [cut]" if pc.truncated else ""
        print(f"  {pc}{flag}")

# Step 2 (cooked): strip parameter clauses, dedup, assign stable ids.
afs, report = extract_abstraction_functions(program, relevant)
print(f"\n{len(afs)} abstraction functions:")
for af in afs:
    print(f"  {af.id:26s} {af}")
print("\nmethods hitting exploration bounds:",
      ", ".join(report.to_header()["truncated"]) or "none")
