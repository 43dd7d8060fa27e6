import logging

from sqlalchemy import Boolean, Column, DateTime, Float, Integer, String, Text, UniqueConstraint, create_engine, func, select
from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.orm import declarative_base, sessionmaker

from config import ConfigError
from trainer import FitnessReport

logger = logging.getLogger(__name__)

Base = declarative_base()


class EvaluationRecord(Base):
    """One trained genome under one trainer/dataset configuration."""
    __tablename__ = 'evaluation_record'
    __table_args__ = (UniqueConstraint('config_hash', 'genome_key', name='uq_config_genome'),)

    id = Column(Integer, primary_key=True)
    config_hash = Column(String(32), nullable=False, index=True)
    genome_key = Column(Text, nullable=False)
    train_accuracy = Column(Float, nullable=False)
    test_accuracy = Column(Float, nullable=False)
    final_loss = Column(Float, nullable=True)
    valid = Column(Boolean, nullable=False)
    failure_reason = Column(String(255), nullable=True)
    created_at = Column(DateTime, default=func.current_timestamp(), nullable=False)

    def to_report(self):
        return FitnessReport(
            train_accuracy=self.train_accuracy,
            test_accuracy=self.test_accuracy,
            final_loss=self.final_loss,
            valid=self.valid,
            failure_reason=self.failure_reason,
        )

    @classmethod
    def lookup(cls, session, config_hash, genome_key):
        stmt = select(cls).filter_by(config_hash=config_hash, genome_key=genome_key)
        record = session.execute(stmt).scalar_one_or_none()
        return record.to_report() if record else None

    @classmethod
    def save(cls, session, config_hash, genome_key, report):
        record = cls(
            config_hash=config_hash,
            genome_key=genome_key,
            train_accuracy=report.train_accuracy,
            test_accuracy=report.test_accuracy,
            final_loss=report.final_loss,
            valid=report.valid,
            failure_reason=report.failure_reason,
        )
        session.add(record)
        return record


class FitnessStore:
    """Persistent evaluation cache shared across runs."""

    def __init__(self, url):
        self.url = url
        try:
            self.engine = create_engine(url)
            Base.metadata.create_all(self.engine)
        except SQLAlchemyError as e:
            raise ConfigError(f'cannot open fitness store {url}: {e}') from e
        self.Session = sessionmaker(bind=self.engine, expire_on_commit=False)

    def lookup(self, config_hash, genome_key):
        try:
            with self.Session() as session:
                return EvaluationRecord.lookup(session, config_hash, genome_key)
        except SQLAlchemyError as e:
            logger.warning(f'Fitness store lookup failed: {e}')
            return None

    def save_many(self, config_hash, items):
        """Store ``(genome_key, report)`` pairs, skipping keys already present."""
        with self.Session() as session:
            try:
                for genome_key, report in items:
                    if EvaluationRecord.lookup(session, config_hash, genome_key) is None:
                        EvaluationRecord.save(session, config_hash, genome_key, report)
                session.commit()
            except SQLAlchemyError as e:
                session.rollback()
                logger.warning(f'Fitness store write failed: {e}')

    def count(self):
        try:
            with self.Session() as session:
                return session.execute(select(func.count(EvaluationRecord.id))).scalar_one()
        except SQLAlchemyError as e:
            raise ConfigError(f'cannot read fitness store {self.url}: {e}') from e

    def clear(self):
        with self.Session() as session:
            try:
                deleted = session.query(EvaluationRecord).delete()
                session.commit()
            except SQLAlchemyError as e:
                session.rollback()
                raise ConfigError(f'cannot clear fitness store {self.url}: {e}') from e
        logger.info(f'Cleared {deleted} stored evaluations')
        return deleted

    def close(self):
        self.engine.dispose()
