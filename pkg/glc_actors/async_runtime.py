"""
GLC Actors - アクターランタイム 非同期版

アクターごとに1つのタスクと受信キューを持つ。スケジューラーが順番を決めて
該当アクターのキューに手番を入れ、アクターのタスクがその1ステップを実行する。
手番の順序は同期版と同じなので、イベントログも一致する。
"""

from __future__ import annotations
import asyncio
from typing import Dict, List, Optional, Tuple
import logging

from .core.base_runtime import BaseActorRuntime
from .exceptions import EventLimitExceeded
from .models.actor import Event
from .models.graph import PortGraph

logger = logging.getLogger(__name__)

# 受信キューに入るもの: 手番（結果を返す Future）か停止の合図（None）
Turn = Optional["asyncio.Future[bool]"]


class AsyncActorRuntime(BaseActorRuntime):
    """
    アクターランタイム（非同期版）

    実行順序は同じ設定の ActorRuntime と一致する。分裂で生まれたアクターには
    最初の手番が来たときにタスクを起こす。
    """

    async def _actor_loop(self, name: str, inbox: "asyncio.Queue[Turn]") -> None:
        """アクター name のタスク本体（停止の合図まで手番を処理する）"""
        while True:
            turn = await inbox.get()
            if turn is None:
                return
            try:
                turn.set_result(self.step(name))
            except Exception as e:
                turn.set_exception(e)

    async def run(self) -> Tuple[PortGraph, List[Event]]:
        """
        静止状態になるまで非同期で実行する

        Raises:
            EventLimitExceeded: 最大イベント数に到達
        """
        s = self.system
        loop = asyncio.get_running_loop()
        inboxes: Dict[str, "asyncio.Queue[Turn]"] = {}
        self.actor_tasks: Dict[str, "asyncio.Task[None]"] = {}
        try:
            while not s.quiescent():
                if len(s.events) >= self.max_events:
                    logger.info("event limit reached", extra={"events": len(s.events)})
                    raise EventLimitExceeded(
                        f"no quiescence within {self.max_events} events",
                        graph=s.graph.copy(),
                        events=list(s.events),
                    )
                name = self._pick()
                if name not in inboxes:
                    inboxes[name] = asyncio.Queue()
                    self.actor_tasks[name] = loop.create_task(
                        self._actor_loop(name, inboxes[name]), name=f"actor:{name}"
                    )
                    logger.debug("actor task started", extra={"actor": name})
                turn: "asyncio.Future[bool]" = loop.create_future()
                await inboxes[name].put(turn)
                await turn
        finally:
            for inbox in inboxes.values():
                inbox.put_nowait(None)
            await asyncio.gather(*self.actor_tasks.values(), return_exceptions=True)
        return s.graph, s.events

    async def run_many(self, others: List["AsyncActorRuntime"]) -> List[Tuple[PortGraph, List[Event]]]:
        """独立した複数の系を並行に実行する（self を先頭に含む）"""
        return list(await asyncio.gather(self.run(), *(other.run() for other in others)))
