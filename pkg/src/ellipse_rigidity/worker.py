import logging
import threading
from abc import ABC, abstractmethod
from concurrent.futures import Future, ThreadPoolExecutor, wait as futures_wait
from typing import Dict, Generic, Iterable, List, Optional, Set, TypeVar

logger = logging.getLogger(__name__)
TaskT = TypeVar("TaskT")
ResultT = TypeVar("ResultT")


class PoolWork(Generic[TaskT, ResultT], ABC):
    """
    线程池并发处理一批任务，结果按任务顺序返回。

    任意一个任务抛错后不再提交新任务，等在途任务结束后把第一个异常抛出。

    用法：
    >>> class Square(PoolWork[int, int]):
    ...     def handle(self, task: int) -> int:
    ...         return task * task
    >>> Square(max_workers=2).run([1, 2, 3])
    [1, 4, 9]
    """

    def __init__(self, max_workers: int = 4) -> None:
        if max_workers < 1:
            raise ValueError(f"max_workers must be >= 1, got {max_workers}")
        self._max_workers = max_workers

        # 生命周期
        self._stop_evt = threading.Event()
        self._first_exc: Optional[BaseException] = None

        # 条件变量：线程池满载时阻塞
        self._lock = threading.Lock()
        self._cond = threading.Condition(self._lock)
        self._futures: Set["Future[ResultT]"] = set()

    # ---------------- 子类必须实现 ----------------
    @abstractmethod
    def handle(self, task: TaskT) -> ResultT:
        raise NotImplementedError

    # ---------------- 公共 API ----------------
    def run(self, tasks: Iterable[TaskT]) -> List[ResultT]:
        """阻塞运行，直到所有任务完成或某个任务抛错。"""
        logger.info("PoolWork<%s> started with %d workers", self.__class__.__name__, self._max_workers)
        ordered: Dict[int, "Future[ResultT]"] = {}
        executor = ThreadPoolExecutor(max_workers=self._max_workers)
        try:
            for index, task in enumerate(tasks):
                if self._stop_evt.is_set() or self._first_exc is not None:
                    break

                # 1. 线程池满就阻塞
                with self._lock:
                    while len(self._futures) >= self._max_workers:
                        self._cond.wait()
                    if self._first_exc is not None:
                        break

                # 2. 提交
                fut = executor.submit(self._safe_handle, task)
                with self._lock:
                    self._futures.add(fut)
                fut.add_done_callback(self._on_future_done)
                ordered[index] = fut

        except KeyboardInterrupt:
            logger.info("Caught Ctrl-C, shutting down…")
            self._stop_evt.set()
        finally:
            futures_wait(list(ordered.values()), timeout=None)
            executor.shutdown(wait=True)
            logger.info("PoolWork<%s> stopped.", self.__class__.__name__)
        if self._first_exc is not None:
            raise self._first_exc
        return [ordered[index].result() for index in sorted(ordered)]

    def stop(self) -> None:
        """不再提交新任务；在途任务照常完成。"""
        self._stop_evt.set()

    # ---------------- 内部 ----------------
    def _safe_handle(self, task: TaskT) -> ResultT:
        try:
            return self.handle(task)
        except Exception as exc:
            with self._lock:
                if self._first_exc is None:
                    self._first_exc = exc
                    logger.exception("Task %r failed, no more tasks will be submitted", task)
            raise

    def _on_future_done(self, fut: "Future[ResultT]") -> None:
        with self._lock:
            self._futures.discard(fut)
            if len(self._futures) < self._max_workers:
                self._cond.notify()
