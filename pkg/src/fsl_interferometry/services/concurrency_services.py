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
"""Worker pool service to evaluate grid points concurrently."""

import asyncio
from typing import Any, Callable, List, Sequence, Union

from loguru import logger
from pydantic import ValidationError

from fsl_interferometry.exceptions import ComputationError
from fsl_interferometry.logging import time_and_tell_async
from fsl_interferometry.models import ExceptionSource, ProcessException


class WorkerPool:
    """Worker pool class to bound the number of concurrent evaluations."""

    def __init__(self, max_workers: int, debug_mode: bool = False) -> None:
        """
        Initialize the worker pool.

        Args:
            max_workers (int): Number of evaluations allowed to run at once.
            debug_mode (bool): Whether to log the duration of each evaluation.
        """
        if max_workers < 1:
            raise ValueError(f"max_workers must be at least 1, got {max_workers}.")

        self.max_workers: int = max_workers
        self.debug_mode: bool = debug_mode

        self.queue = asyncio.Queue(maxsize=max_workers)
        for slot in range(max_workers):
            self.queue.put_nowait(slot)

    async def get_slot(self) -> int:
        """
        Wait for the next free worker slot.

        Returns:
            int: Index of the slot.
        """
        return await self.queue.get()

    def release_slot(self, slot: int) -> None:
        """
        Return a slot to the pool.

        Args:
            slot (int): Index of the slot to release.
        """
        if not any(item == slot for item in self.queue._queue):
            self.queue.put_nowait(slot)

    async def _run_one(
        self, func: Callable[[float], Any], value: float
    ) -> Union[Any, ProcessException]:
        slot = await self.get_slot()
        try:
            result, _ = await time_and_tell_async(
                lambda: func(value), f"point {value} on slot {slot}", self.debug_mode
            )
            return result
        except (ValueError, ValidationError) as e:
            return ProcessException(
                source=ExceptionSource.validation, message=str(e), value=value
            )
        except ComputationError as e:
            return ProcessException(
                source=ExceptionSource.computation, message=str(e), value=value
            )
        finally:
            self.release_slot(slot)

    async def map(
        self, func: Callable[[float], Any], values: Sequence[float]
    ) -> List[Union[Any, ProcessException]]:
        """
        Evaluate func on every value, at most `max_workers` at a time.

        Args:
            func (Callable[[float], Any]): Blocking function of one grid value.
            values (Sequence[float]): Grid values.

        Returns:
            List[Union[Any, ProcessException]]: Results in input order; failed points
                are returned as `ProcessException` records.
        """
        results = await asyncio.gather(*(self._run_one(func, v) for v in values))

        failures = [r for r in results if isinstance(r, ProcessException)]
        if failures:
            logger.warning(f"{len(failures)} of {len(values)} grid points failed.")

        return list(results)


def run_grid(
    func: Callable[[float], Any],
    values: Sequence[float],
    max_workers: int,
    debug_mode: bool = False,
) -> List[Union[Any, ProcessException]]:
    """Evaluate a grid on a fresh pool from synchronous code."""

    async def _main() -> List[Union[Any, ProcessException]]:
        return await WorkerPool(max_workers, debug_mode).map(func, values)

    return asyncio.run(_main())
