# Copyright 2024 The FSL Interferometry Authors. All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Logging module of the FSL Interferometry engine."""

import asyncio
import sys
import time
from typing import Any, Callable, Tuple

from loguru import logger


def configure_logging(debug_mode: bool) -> None:
    """
    Route loguru records to stderr, keeping stdout free for command output.

    Args:
        debug_mode: Whether debug records should be emitted.
    """
    logger.remove()
    logger.add(
        sys.stderr,
        level="DEBUG" if debug_mode else "INFO",
    )


def time_and_tell(
    func: Callable[[], Any], func_name: str, debug_mode: bool
) -> Tuple[Any, float]:
    """
    Call a zero-argument function and log its execution time if debug is on.

    Args:
        func: The function to call.
        func_name: The name of the function for logging purposes.
        debug_mode: The debug setting for logging purposes.

    Returns:
        The function result and the elapsed time in seconds.
    """
    start_time = time.perf_counter()
    result = func()
    process_time = time.perf_counter() - start_time

    if debug_mode:
        logger.debug(f"{func_name} executed in {process_time:.4f} secs")

    return result, process_time


async def time_and_tell_async(
    func: Callable[[], Any], func_name: str, debug_mode: bool
) -> Tuple[Any, float]:
    """
    Run a blocking zero-argument function in the default executor and time it.

    Args:
        func: The function to call.
        func_name: The name of the function for logging purposes.
        debug_mode: The debug setting for logging purposes.

    Returns:
        The function result and the elapsed time in seconds.
    """
    start_time = time.perf_counter()

    loop = asyncio.get_running_loop()
    result = await loop.run_in_executor(None, func)

    process_time = time.perf_counter() - start_time

    if debug_mode:
        logger.debug(f"{func_name} executed in {process_time:.4f} secs")

    return result, process_time
