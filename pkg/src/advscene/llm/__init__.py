from advscene.llm.client import (
    ChatConfig,
    ChatTranscript,
    FixtureChatClient,
    HttpChatClient,
    complete_chat,
)
from advscene.llm.parsing import extract_json_block, parse_anchor_response, parse_plan_response

__all__ = [
    "ChatConfig",
    "ChatTranscript",
    "FixtureChatClient",
    "HttpChatClient",
    "complete_chat",
    "extract_json_block",
    "parse_anchor_response",
    "parse_plan_response",
]
