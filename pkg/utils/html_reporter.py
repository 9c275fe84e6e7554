"""
HTML Report Generator

Utility for rendering the checks of one CLI command as a standalone HTML page.
"""

import os
from datetime import datetime
from typing import Any, Dict, List

from jinja2 import Template

from utils.helpers import format_float


class HTMLReporter:
    """HTML report generator for command check results"""

    def __init__(self, output_dir: str = 'output'):
        """
        Initialize the HTML reporter

        Args:
            output_dir: directory the report is written to
        """
        self.output_dir = output_dir
        os.makedirs(self.output_dir, exist_ok=True)

    def generate_check_report(self, command: str, checks: List[Dict[str, Any]],
                              summary: Dict[str, Any]) -> str:
        """
        Generate HTML report for the checks of a command

        Args:
            command: CLI subcommand name
            checks: dicts with 'name', 'passed' and optional 'value', 'threshold', 'detail'
            summary: key/value pairs shown in the summary cards

        Returns:
            Path to generated HTML file
        """
        rows = [
            {
                'name': check.get('name', ''),
                'passed': bool(check.get('passed')),
                'value': format_float(check['value']) if 'value' in check else '',
                'threshold': format_float(check['threshold']) if 'threshold' in check else '',
                'detail': check.get('detail', '')
            }
            for check in checks
        ]
        failed = sum(1 for row in rows if not row['passed'])

        html_content = self._get_check_template().render(
            title=f"csx {command} report",
            timestamp=datetime.now().strftime("%Y-%m-%d %H:%M:%S"),
            summary={key: format_float(value) for key, value in summary.items()},
            checks=rows,
            total_count=len(rows),
            failed_count=failed
        )

        filepath = os.path.join(self.output_dir, f"{command}_report.html")
        with open(filepath, 'w', encoding='utf-8') as f:
            f.write(html_content)
        return filepath

    def _get_check_template(self) -> Template:
        """Get check report HTML template"""
        template_content = """
<!DOCTYPE html>
<html lang="en">
<head>
    <meta charset="UTF-8">
    <title>{{ title }}</title>
    <style>
        body {
            font-family: 'Segoe UI', Tahoma, Geneva, Verdana, sans-serif;
            color: #333;
            background-color: #f5f5f5;
        }

        .container {
            max-width: 1100px;
            margin: 0 auto;
            padding: 20px;
        }

        .header {
            background: linear-gradient(135deg, #667eea 0%, #764ba2 100%);
            color: white;
            padding: 24px;
            border-radius: 10px;
            margin-bottom: 24px;
        }

        .summary-cards {
            display: grid;
            grid-template-columns: repeat(auto-fit, minmax(200px, 1fr));
            gap: 16px;
            margin-bottom: 24px;
        }

        .card {
            background: white;
            padding: 16px;
            border-radius: 10px;
            box-shadow: 0 4px 6px rgba(0, 0, 0, 0.1);
        }

        .card .label {
            color: #666;
            font-size: 0.9em;
        }

        table {
            width: 100%;
            border-collapse: collapse;
            background: white;
        }

        th, td {
            padding: 8px 12px;
            border-bottom: 1px solid #eee;
            text-align: left;
            font-family: monospace;
        }

        .pass { color: #2e7d32; font-weight: bold; }
        .fail { color: #c62828; font-weight: bold; }
    </style>
</head>
<body>
    <div class="container">
        <div class="header">
            <h1>{{ title }}</h1>
            <div class="timestamp">Generated {{ timestamp }}</div>
            <div>{{ total_count - failed_count }} of {{ total_count }} checks passed</div>
        </div>

        <div class="summary-cards">
            {% for key, value in summary.items() %}
            <div class="card">
                <div class="label">{{ key }}</div>
                <div>{{ value }}</div>
            </div>
            {% endfor %}
        </div>

        <table>
            <thead>
                <tr><th>Check</th><th>Status</th><th>Value</th><th>Threshold</th><th>Detail</th></tr>
            </thead>
            <tbody>
                {% for check in checks %}
                <tr>
                    <td>{{ check.name }}</td>
                    <td class="{{ 'pass' if check.passed else 'fail' }}">{{ 'PASS' if check.passed else 'FAIL' }}</td>
                    <td>{{ check.value }}</td>
                    <td>{{ check.threshold }}</td>
                    <td>{{ check.detail }}</td>
                </tr>
                {% endfor %}
            </tbody>
        </table>
    </div>
</body>
</html>
"""
        return Template(template_content)
