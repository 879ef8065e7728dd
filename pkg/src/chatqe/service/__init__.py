"""Session-based bilingual chat relay with translation checking."""

from .state import ChatService, Message, Participant, Session, SessionStore

__all__ = ["ChatService", "Message", "Participant", "Session", "SessionStore"]
