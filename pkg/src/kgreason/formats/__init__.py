from .graphml import GraphMLError, export_graphml, graphml_string, import_graphml, parse_graphml
from .html import embedded_data, export_html, html_string
from .reports import histogram_rows, to_json, write_csv, write_json
from .triples import export_triples_json, graph_from_triples_json, import_triples_json, load_records

__all__ = [
    "GraphMLError",
    "embedded_data",
    "export_graphml",
    "export_html",
    "export_triples_json",
    "graph_from_triples_json",
    "graphml_string",
    "histogram_rows",
    "html_string",
    "import_graphml",
    "import_triples_json",
    "load_records",
    "parse_graphml",
    "to_json",
    "write_csv",
    "write_json",
]
