"""
Plain-text command reports rendered from jinja2 templates.
"""
from pathlib import Path
from typing import Any

from jinja2 import Environment, FileSystemLoader, StrictUndefined, TemplateError
from pydantic import BaseModel

from services.numeric_core import PolytopeToolkitError


class ReportRenderError(PolytopeToolkitError):
    """Custom exception for report template errors."""
    pass


class ReportRenderer:
    """Renders the text templates in ``templates/``, one per command."""

    def __init__(self, template_dir: str | Path | None = None):
        template_dir = Path(template_dir) if template_dir else Path(__file__).parent.parent / "templates"
        self.jinja_env = Environment(
            loader=FileSystemLoader(str(template_dir)),
            undefined=StrictUndefined,
            trim_blocks=True,
            lstrip_blocks=True,
            keep_trailing_newline=True,
        )

    def render(self, command: str, report: BaseModel | dict[str, Any], **extra: Any) -> str:
        data = report.model_dump() if isinstance(report, BaseModel) else dict(report)
        data.update(extra)
        try:
            template = self.jinja_env.get_template(f"{command}.txt.j2")
            return template.render(**data)
        except TemplateError as e:
            raise ReportRenderError(f"Error rendering {command} report: {str(e)}")
