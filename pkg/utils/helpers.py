"""
Helper Functions

Common utility functions used across the application.
"""

import csv
import json
import logging
import os
from datetime import datetime
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def format_float(value: Any) -> str:
    """Full 17-significant-digit text for numeric values, str() otherwise"""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), '.17g')
    return str(value)


def _ensure_directory(filename: str):
    directory = os.path.dirname(filename)
    if directory:
        os.makedirs(directory, exist_ok=True)


def save_to_json(data: Dict[str, Any], filename: str) -> bool:
    """
    Save data to JSON file

    Args:
        data: Data to save
        filename: Output filename

    Returns:
        True if successful, False otherwise
    """
    try:
        _ensure_directory(filename)
        with open(filename, 'w', encoding='utf-8') as f:
            json.dump(data, f, indent=2, ensure_ascii=False, default=_json_default)
        logger.info("saved %s", filename)
        return True
    except IOError as e:
        logger.error("error saving to %s: %s", filename, e)
        return False


def _json_default(value: Any):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def save_to_csv(rows: Iterable[Sequence[Any]], header: Sequence[str], filename: str) -> bool:
    """
    Save rows to CSV with every float in 17-significant-digit form

    Output depends only on the rows, so identical runs give identical files.
    """
    try:
        _ensure_directory(filename)
        with open(filename, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_float(v) for v in row])
        logger.info("saved %s", filename)
        return True
    except IOError as e:
        logger.error("error saving to %s: %s", filename, e)
        return False


def save_table(rows: List[Sequence[Any]], header: Sequence[str], filename: str, fmt: str = 'csv') -> str:
    """Write a table as CSV or as JSON records; returns the path written"""
    if fmt == 'json':
        path = ensure_file_extension(filename, '.json')
        records = [dict(zip(header, row)) for row in rows]
        save_to_json(create_output_data(records, os.path.splitext(os.path.basename(path))[0]), path)
        return path
    path = ensure_file_extension(filename, '.csv')
    save_to_csv(rows, header, path)
    return path


def format_timestamp(timestamp: datetime = None) -> str:
    """
    Format timestamp for output

    Args:
        timestamp: Datetime object (defaults to current time)

    Returns:
        Formatted timestamp string
    """
    if timestamp is None:
        timestamp = datetime.now()
    return timestamp.isoformat()


def create_output_data(data: List[Dict], data_type: str = "data") -> Dict[str, Any]:
    """
    Create standardized output data structure

    Args:
        data: List of data items
        data_type: Type of data (e.g., "energy_scan", "layer_trace")

    Returns:
        Standardized output dictionary
    """
    return {
        'timestamp': format_timestamp(),
        'data_type': data_type,
        'total_count': len(data),
        'data': data
    }


def create_output_data_dict(data: Dict[str, Any], data_type: str = "data") -> Dict[str, Any]:
    """
    Create standardized output data structure for dictionary data

    Args:
        data: Dictionary data
        data_type: Type of data (e.g., "growth_fit", "solve_report")

    Returns:
        Standardized output dictionary
    """
    return {
        'timestamp': format_timestamp(),
        'data_type': data_type,
        'data': data
    }


def ensure_file_extension(filename: str, extension: str = '.json') -> str:
    """
    Ensure filename has the specified extension

    Args:
        filename: Original filename
        extension: Desired extension (with or without dot)

    Returns:
        Filename with proper extension
    """
    if not extension.startswith('.'):
        extension = '.' + extension
    if not filename.endswith(extension):
        filename += extension
    return filename


def parse_float_list(text: str) -> List[float]:
    """Parse '0.25,0.5' or '1/8,1/16' into floats"""
    values = []
    for item in str(text).split(','):
        item = item.strip()
        if not item:
            continue
        if '/' in item:
            numerator, denominator = item.split('/', 1)
            values.append(float(numerator) / float(denominator))
        else:
            values.append(float(item))
    return values


def spread(values: Sequence[float]) -> float:
    """max / min of positive values"""
    values = np.asarray(values, dtype=float)
    if values.size == 0 or np.min(values) <= 0:
        return float('inf')
    return float(np.max(values) / np.min(values))
