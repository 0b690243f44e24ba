from iirnn.models.corpus import Corpus, CorpusStats


def corpus_stats(corpus: Corpus) -> CorpusStats:
    sessions = [s for u in corpus.users for s in u.sessions]
    num_users = len(corpus.users)
    num_sessions = len(sessions)
    total_events = sum(len(s) for s in sessions)
    return CorpusStats(
        num_users=num_users,
        num_sessions=num_sessions,
        sessions_per_user=num_sessions / num_users if num_users else 0.0,
        avg_session_length=total_events / num_sessions if num_sessions else 0.0,
        num_items=corpus.num_items,
    )
