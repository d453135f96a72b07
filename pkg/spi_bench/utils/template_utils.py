from pathlib import Path
from typing import Any, Dict
from jinja2 import Environment, FileSystemLoader, StrictUndefined
import math

template_dir = Path(__file__).parent.parent / "templates"


def get_template_env() -> Environment:
    """Get the Jinja2 template environment with report filters."""
    env = Environment(
        loader=FileSystemLoader(str(template_dir)),
        undefined=StrictUndefined,
        keep_trailing_newline=True,
        trim_blocks=True,
        lstrip_blocks=True,
    )

    def format_metric(value, digits: int = 4):
        """Fixed-point number; the infinite PSNR sentinel prints as inf."""
        if value is None:
            return "n/a"
        value = float(value)
        if math.isinf(value):
            return "inf"
        if math.isnan(value):
            return "n/a"
        return f"{value:.{digits}f}"

    env.filters['metric'] = format_metric

    return env


def render_template(template_name: str, context: Dict[str, Any]) -> str:
    """
    Render a report template with the given context.

    Args:
        template_name: Name of the template file (e.g., 'summary.md.j2')
        context: Dictionary containing template variables

    Returns:
        str: Rendered text
    """
    env = get_template_env()
    template = env.get_template(template_name)
    return template.render(**context)
